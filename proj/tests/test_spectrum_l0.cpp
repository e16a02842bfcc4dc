#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "cubicspec/spectrum_l0.hpp"

using namespace cubicspec;

namespace {

// Shared across cases; building the basis once keeps the suite fast.
const ModeBasisL0& basis10() {
  static ModeBasisL0 b(eigs_l0(10));
  return b;
}

}  // namespace

TEST_CASE("characteristic function basics", "[delta0]") {
  // Leading Taylor behaviour -lambda^2/12 near the origin.
  for (double l : {1e-3, -2e-3, 5e-4}) {
    CHECK(std::abs(delta0(l) - cplx(-l * l / 12.0)) < 1e-14 * std::abs(l));
  }
  // Even, entire, real on the real axis.
  for (cplx l : {cplx(7.0, 3.0), cplx(-120.0, 41.0), cplx(390.0, -2.0)}) {
    cplx a = delta0(l), b = delta0(-l);
    CHECK(std::abs(a - b) < 1e-12 * (1.0 + std::abs(a)));
  }
  CHECK(delta0(cplx(250.0)).imag() == 0.0);

  // The scaled real-axis form shares zeros with the plain one and matches it
  // after undoing the envelope, while the plain form is still representable.
  for (double k : {2.0, 4.0, 7.0, 12.0}) {
    double plain = delta0(cplx(k * k * k)).real();
    double scaled = delta0_scaled(k);
    double envelope = std::exp(std::sqrt(3.0) * k / 2.0);
    CHECK(std::abs(scaled * envelope - plain) < 1e-10 * (1.0 + std::abs(plain)));
  }
}

TEST_CASE("bracketing residual behaves like an odd, pole-free function", "[delta0]") {
  CHECK(bracket_secular(0.0) == 0.0);
  for (double k : {3.0, 9.0, 20.0}) {
    CHECK(std::abs(bracket_secular(k) + bracket_secular(-k)) < 1e-14);
  }
  // Tangent poles of the underlying equation are rejected, not evaluated.
  try {
    bracket_secular(pi);
    FAIL("expected a failure at the tangent pole");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::pole_at_k);
  }
}

TEST_CASE("eigenvalue roots: brackets, mirror symmetry, frozen digits", "[eigs]") {
  SpectrumL0 s = eigs_l0(20);
  REQUIRE(s.entries.size() == 41u);
  CHECK(s.at(0).mult == 2);
  CHECK(s.at(0).lambda == 0.0);

  for (int n = 1; n <= 20; ++n) {
    double k = s.at(n).k;
    CHECK(k > (2.0 * n - 1.0) * pi);
    CHECK(k < (2.0 * n + 1.0) * pi);
    CHECK(s.at(-n).k == -k);  // mirror is exact by construction
    CHECK(s.at(n).lambda == Catch::Approx(k * k * k).epsilon(1e-15));
    // Root quality is judged on the envelope-factored form; the raw function
    // multiplies any k-rounding by e^{sqrt3 k/2} and is unusable as a gauge.
    CHECK(std::abs(delta0_scaled(k)) <= 1e-10 * std::max(1.0, k * k * k * k));
  }
  // One ulp of k moves the scaled function by ~k^3 eps, so the achievable
  // residual grows with the range; 1e-9 is a few ulps at n = 20.
  CHECK(s.residual < 1e-9);

  // Reference digits from the bisection/secant runs, frozen.
  const double want[8] = {7.3321299363, 13.6135605832, 19.8967535056, 26.1799387798,
                          32.4631240871, 38.7463093943, 45.0294947015, 51.3126800086};
  for (int n = 1; n <= 8; ++n) CHECK(s.at(n).k == Catch::Approx(want[n - 1]).margin(5e-10));
  CHECK(s.at(1).lambda == Catch::Approx(394.176254168740).margin(2e-9));

  // Distance to the asymptote shrinks with n until it reaches the rounding
  // floor of the root itself; the allowance keeps the check honest there.
  double prev = std::abs(s.at(1).k - 2.0 * pi - pi / 3.0);
  for (int n = 2; n <= 20; ++n) {
    double gap = std::abs(s.at(n).k - 2.0 * pi * n - pi / 3.0);
    double floor_n = 64.0 * std::numeric_limits<double>::epsilon() * s.at(n).k;
    CHECK(gap <= prev + floor_n);
    prev = gap;
  }

  try {
    s.at(21);
    FAIL("expected a failure outside the computed range");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::not_a_root);
  }
}

TEST_CASE("eigenfunctions form an orthonormal family", "[modes]") {
  const ModeBasisL0& basis = basis10();
  // 22 functions: the two polynomial branches at zero and |n| in 1..10.
  struct Tag {
    int n, branch;
  };
  std::vector<Tag> tags;
  tags.push_back({0, 1});
  tags.push_back({0, 2});
  for (int n = 1; n <= 10; ++n) {
    tags.push_back({n, 1});
    tags.push_back({-n, 1});
  }
  REQUIRE(tags.size() == 22u);
  const CompositeRule& r = basis.rule();
  double worst = 0.0;
  for (std::size_t a = 0; a < tags.size(); ++a) {
    for (std::size_t b = a; b < tags.size(); ++b) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j)
        acc += r.w[j] * basis.eval(tags[a].n, tags[a].branch, r.x[j]) *
               std::conj(basis.eval(tags[b].n, tags[b].branch, r.x[j]));
      double want = (a == b) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(acc - want));
    }
  }
  INFO("worst Gram deviation " << worst);
  CHECK(worst <= 1e-8);
}

TEST_CASE("modes satisfy the boundary conditions and the equation", "[modes]") {
  const ModeBasisL0& basis = basis10();
  for (int n : {1, -2, 5, 10}) {
    double lam = basis.lambda_of(n);
    ModeJet a = basis.jet(n, 1, 0.0);
    ModeJet b = basis.jet(n, 1, 1.0);
    double scale = std::abs(a.d2) + std::abs(b.d2) + std::abs(lam);
    CHECK(std::abs(a.d2) < 1e-10 * scale);
    CHECK(std::abs(b.d2) < 1e-10 * scale);
    CHECK(std::abs(b.d1 - a.d1) < 1e-10 * (std::abs(a.d1) + std::abs(b.d1) + 1.0));

    // i u''' = lambda u, with u''' from central differences of the jet.
    const double h = 1e-5;
    for (double x : {0.31, 0.64}) {
      cplx d3 = (basis.jet(n, 1, x + h).d2 - basis.jet(n, 1, x - h).d2) / (2.0 * h);
      cplx u = basis.eval(n, 1, x);
      CHECK(std::abs(iu * d3 - lam * u) < 1e-3 * (std::abs(lam) * std::abs(u) + 1.0));
    }
  }
}

TEST_CASE("normalization bookkeeping", "[modes]") {
  const ModeBasisL0& basis = basis10();
  EigenfunctionL0 u = eigenfunction_l0(basis, 7, 1);
  CHECK(u.norm_check == Catch::Approx(1.0).epsilon(1e-12));
  // Branch 2 is reserved for the zero eigenvalue.
  try {
    basis.eval(3, 2, 0.5);
    FAIL("expected a failure for branch 2 away from zero");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::invalid_branch);
  }
}

TEST_CASE("projection recovers eigenbasis coefficients", "[modes]") {
  const ModeBasisL0& basis = basis10();
  Potential p3 = coefficients_of([&](double x) { return basis.eval(3, 1, x); }, basis);
  CHECK(std::abs(p3.coeff.at(3) - 1.0) < 1e-10);
  for (const auto& [n, c] : p3.coeff)
    if (n != 3) CHECK(std::abs(c) < 1e-8);
  CHECK(std::abs(p3.v01) < 1e-8);
  CHECK(std::abs(p3.v02) < 1e-8);

  Potential pz = coefficients_of([](double x) { return zero_mode_2(x); }, basis);
  CHECK(std::abs(pz.v02 - 1.0) < 1e-10);
  CHECK(std::abs(pz.v01) < 1e-10);
}

TEST_CASE("resolvent closed form against the spectral truth", "[resolvent]") {
  const ModeBasisL0& basis = basis10();
  // For f equal to a single mode the resolvent is that mode over the shift.
  auto f = [&](double x) { return basis.eval(2, 1, x); };
  cplx lambda(100.0, 0.0);
  auto r = resolvent_l0(basis, f, lambda, ResolventMethod::closed_form);
  cplx shift = basis.lambda_of(2) - lambda;
  for (double x : {0.1, 0.45, 0.8, 1.0}) {
    CHECK(std::abs(r(x) - f(x) / shift) < 1e-9);
  }
}

TEST_CASE("resolvent methods agree on smooth data", "[resolvent]") {
  static ModeBasisL0 wide(eigs_l0(40));
  auto f = [](double x) { return cplx(x * (1.0 - x), 0.3 * x); };
  for (cplx lambda : {cplx(50.0, 3.0), cplx(-210.0, 0.0), cplx(1000.0, -40.0)}) {
    auto rc = resolvent_l0(wide, f, lambda, ResolventMethod::closed_form);
    auto rs = resolvent_l0(wide, f, lambda, ResolventMethod::spectral_series, 60);
    double scale = 0.0, diff = 0.0;
    for (int i = 0; i <= 20; ++i) {
      double x = i / 20.0;
      scale = std::max(scale, std::abs(rc(x)));
      diff = std::max(diff, std::abs(rc(x) - rs(x)));
    }
    INFO("lambda " << lambda.real() << "+" << lambda.imag() << "i, diff " << diff);
    CHECK(diff <= 1e-5 * (1.0 + scale));
  }
}

TEST_CASE("resolvent defect under a high-order stencil", "[resolvent]") {
  const ModeBasisL0& basis = basis10();
  auto f = [](double x) { return cplx(std::sin(2.0 * x), x); };
  cplx lambda(100.0, 0.0);
  auto r = resolvent_l0(basis, f, lambda, ResolventMethod::closed_form);
  // Sixth-order central third-derivative stencil.
  const double w[7] = {1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0};
  const double h = 1e-3;
  for (double x0 : {0.25, 0.52, 0.75}) {
    cplx d3 = 0.0;
    for (int j = -3; j <= 3; ++j) d3 += w[j + 3] * r(x0 + j * h);
    d3 /= h * h * h;
    cplx defect = iu * d3 - lambda * r(x0) - f(x0);
    CHECK(std::abs(defect) < 1e-4 * (1.0 + std::abs(f(x0)) + std::abs(lambda * r(x0))));
  }
}

TEST_CASE("resolvent refuses the spectrum", "[resolvent][errors]") {
  const ModeBasisL0& basis = basis10();
  auto f = [](double x) { return cplx(x); };
  try {
    resolvent_l0(basis, f, cplx(basis.lambda_of(1)), ResolventMethod::closed_form);
    FAIL("expected a failure on the spectrum");
  } catch (const Failure& fe) {
    CHECK(fe.code() == Err::lambda_on_spectrum);
  }
  CHECK(dist_to_spectrum_l0(basis.spectrum(), cplx(basis.lambda_of(1) + 0.5)) ==
        Catch::Approx(0.5).margin(1e-9));
  // Beyond the computed range the asymptotic root positions take over.
  double k_far = 2.0 * pi * 30 + pi / 3.0;
  CHECK(dist_to_spectrum_l0(basis.spectrum(), cplx(k_far * k_far * k_far)) < 1.0);
}
