#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "cubicspec/perturbation.hpp"

using namespace cubicspec;

namespace {

const ModeBasisL0& basis8() {
  static ModeBasisL0 b(eigs_l0(8));
  return b;
}

Potential constant_one() {
  Potential v;
  v.v01 = 1.0;
  v.sampler = [](double) { return cplx(1.0); };
  return v;
}

Potential mode_potential(int n) {
  Potential v;
  v.coeff[n] = 1.0;
  v.cutoff = std::abs(n);
  v.sampler = [n](double x) { return basis8().eval(n, 1, x); };
  return v;
}

SecularData secular_for(const Potential& v, double alpha) {
  SigmaSplit sp = split_sigma(v, basis8().spectrum(), 1e-9);
  sp.sd.alpha = alpha;
  return sp.sd;
}

const PerturbedEntry* entry_near(const PerturbedSpectrum& s, double lambda, double tol) {
  for (const auto& e : s.entries)
    if (std::abs(e.lambda - lambda) <= tol) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("support splitting separates vanishing coefficients", "[secular]") {
  Potential v;
  v.coeff[1] = cplx(0.6, -0.3);
  v.coeff[-4] = 0.2;
  v.cutoff = 4;
  SigmaSplit sp = split_sigma(v, basis8().spectrum(), 1e-9);
  REQUIRE(sp.sd.support.size() == 2u);
  CHECK(sp.sd.support.front().n == -4);  // ascending in lambda
  CHECK(sp.sd.support.back().n == 1);
  CHECK(sp.sd.support.back().weight == Catch::Approx(std::norm(v.coeff[1])).epsilon(1e-14));
  CHECK(!sp.sd.zero_in_sigma1);
  CHECK(sp.sd.tail_norm < 1e-12);
  // 0 and the 13 untouched nonzero indices survive.
  CHECK(sp.sigma0.size() == 15u);

  Potential sampled = make_sampled([](double) { return cplx(1.0); });
  try {
    split_sigma(sampled, basis8().spectrum(), 1e-9);
    FAIL("expected a failure for a sampler-only potential");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::bad_potential_format);
  }
}

TEST_CASE("secular function closed form and pole guard", "[secular]") {
  SecularData sd = secular_for(mode_potential(1), 2.0);
  double l1 = basis8().lambda_of(1);
  for (cplx lam : {cplx(3.0, 1.0), cplx(-50.0, 0.0), cplx(500.0, -9.0)}) {
    cplx want = 1.0 + 2.0 / (l1 - lam);
    CHECK(std::abs(q_eval(sd, lam).value - want) < 1e-13);
  }
  try {
    q_eval(sd, cplx(l1));
    FAIL("expected a failure on the support");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::on_pole);
  }
}

TEST_CASE("truncation bound tracks distance to the uncomputed tail", "[secular]") {
  // Mode 12 lies beyond the working window, so its weight lands in the tail.
  static ModeBasisL0 wide(eigs_l0(12));
  auto f = [](double x) { return wide.eval(2, 1, x) + 0.3 * wide.eval(12, 1, x); };
  Potential v = coefficients_of(f, basis8());
  SecularData sd = secular_for(v, 1.0);
  CHECK(sd.tail_norm == Catch::Approx(0.3).epsilon(1e-4));
  double near = q_eval(sd, cplx(0.5, 1.0)).tail_bound;
  double far = q_eval(sd, cplx(0.5, 1e6)).tail_bound;
  CHECK(near > 0.0);
  CHECK(far < near);
}

TEST_CASE("characteristic ratio matches the secular function", "[delta]") {
  Potential v = constant_one();
  for (double alpha : {-1.0, 0.5, 2.0}) {
    SecularData sd = secular_for(v, alpha);
    for (cplx lam : {cplx(3.0, 2.0), cplx(-7.0, 1.5), cplx(40.0, -3.0), cplx(11.0, 0.0)}) {
      cplx da = delta_alpha(v, alpha, lam);
      cplx rhs = q_eval(sd, lam).value * delta0(lam);
      CHECK(std::abs(da - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
  }
  CHECK(std::abs(delta_alpha(v, 0.0, cplx(5.0, 1.0)) - delta0(cplx(5.0, 1.0))) == 0.0);
  // Real lambda gives a real value by construction.
  CHECK(delta_alpha(v, 0.7, cplx(23.0)).imag() == 0.0);
}

TEST_CASE("zero stays simple when the potential meets the zero modes", "[spectrum]") {
  // Constant potential: support is the zero eigenvalue alone, and the single
  // created eigenvalue lands exactly at alpha.
  PerturbedSpectrum ps = spectrum_alpha(constant_one(), 0.5, 6, -1.0, &basis8());
  const PerturbedEntry* z = entry_near(ps, 0.0, 1e-12);
  REQUIRE(z != nullptr);
  CHECK(z->mult == 1);
  CHECK(z->cls == EigClass::zero_special);
  const PerturbedEntry* mu = entry_near(ps, 0.5, 1e-9);
  REQUIRE(mu != nullptr);
  CHECK(mu->cls == EigClass::sigma2_simple);
  // Every nonzero unperturbed eigenvalue survives untouched.
  for (int n = 1; n <= 6; ++n) {
    for (int sgn : {1, -1}) {
      const PerturbedEntry* e = entry_near(ps, basis8().lambda_of(sgn * n), 1e-9);
      REQUIRE(e != nullptr);
      CHECK(e->cls == EigClass::sigma0_simple);
      CHECK(e->mult == 1);
    }
  }
  REQUIRE(ps.entries.size() == 14u);
  CHECK(std::is_sorted(ps.entries.begin(), ps.entries.end(),
                       [](const PerturbedEntry& a, const PerturbedEntry& b) {
                         return a.lambda < b.lambda;
                       }));
}

TEST_CASE("zero doubles when the potential misses the zero modes", "[spectrum]") {
  double l1 = basis8().lambda_of(1);
  PerturbedSpectrum ps = spectrum_alpha(mode_potential(1), 1.0, 6, -1.0, &basis8());
  const PerturbedEntry* z = entry_near(ps, 0.0, 1e-12);
  REQUIRE(z != nullptr);
  CHECK(z->mult == 2);
  // The single support pole moves its eigenvalue up by exactly alpha.
  const PerturbedEntry* mu = entry_near(ps, l1 + 1.0, 1e-7);
  REQUIRE(mu != nullptr);
  CHECK(mu->cls == EigClass::sigma2_simple);
  CHECK(entry_near(ps, l1, 0.5) == nullptr);  // the original pole is gone
}

TEST_CASE("tuned coupling produces the triple eigenvalue at zero", "[spectrum]") {
  Potential v;
  v.coeff[1] = 1.0 / std::sqrt(2.0);
  v.coeff[2] = 1.0 / std::sqrt(2.0);
  v.cutoff = 2;
  double l1 = basis8().lambda_of(1), l2 = basis8().lambda_of(2);
  double alpha = -2.0 / (1.0 / l1 + 1.0 / l2);
  PerturbedSpectrum ps = spectrum_alpha(v, alpha, 6, -1.0, &basis8());
  const PerturbedEntry* z = entry_near(ps, 0.0, 1e-12);
  REQUIRE(z != nullptr);
  CHECK(z->mult == 3);
  CHECK(z->cls == EigClass::zero_special);
  // Exactly one created eigenvalue strictly inside the single support gap.
  int in_gap = 0;
  for (const auto& e : ps.entries)
    if (e.cls == EigClass::sigma2_simple) {
      CHECK(e.lambda > l1);
      CHECK(e.lambda < l2);
      ++in_gap;
    }
  CHECK(in_gap == 1);
}

TEST_CASE("one created eigenvalue per support gap", "[spectrum][interlacing]") {
  Potential v;
  v.coeff[-2] = 0.6;
  v.coeff[-1] = cplx(0.0, 0.5);
  v.coeff[1] = -0.4;
  v.coeff[2] = cplx(0.3, 0.2);
  v.cutoff = 2;
  const double alpha = 2.0;
  PerturbedSpectrum ps = spectrum_alpha(v, alpha, 6, -1.0, &basis8());

  std::vector<double> support = {-basis8().lambda_of(2), -basis8().lambda_of(1),
                                 basis8().lambda_of(1), basis8().lambda_of(2)};
  std::vector<double> created;
  for (const auto& e : ps.entries)
    if (e.cls == EigClass::sigma2_simple) created.push_back(e.lambda);
  REQUIRE(created.size() == support.size());  // three gaps plus the outer root
  for (std::size_t g = 0; g + 1 < support.size(); ++g) {
    int count = 0;
    for (double mu : created)
      if (mu > support[g] && mu < support[g + 1]) ++count;
    CHECK(count == 1);
  }
  // Positive coupling pushes the outer root above the top pole.
  CHECK(std::count_if(created.begin(), created.end(),
                      [&](double mu) { return mu > support.back(); }) == 1);
  const PerturbedEntry* z = entry_near(ps, 0.0, 1e-12);
  REQUIRE(z != nullptr);
  CHECK(z->mult == 2);
}

TEST_CASE("created eigenfunction: normalization and operator defect", "[eigenfunction]") {
  Potential v = mode_potential(1);
  const double alpha = 1.0;
  SecularData sd = secular_for(v, alpha);
  double mu = basis8().lambda_of(1) + alpha;
  EigenfunctionAlpha u = eigenfunction_alpha(sd, mu, basis8());
  CHECK(u.norm_check == Catch::Approx(1.0).epsilon(1e-10));
  CHECK(u.g_prime == Catch::Approx(1.0).epsilon(1e-12));

  // i y''' + alpha <y, v> v = mu y, third derivative by differencing the jet.
  const CompositeRule& r = basis8().rule();
  cplx proj = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j)
    proj += r.w[j] * u.evaluator(r.x[j]) * std::conj(v.sampler(r.x[j]));
  const double h = 1e-5;
  for (double x : {0.33, 0.71}) {
    // The eigenfunction here is a multiple of the n=1 mode, so its jet is too.
    cplx d3 = (basis8().jet(1, 1, x + h).d2 - basis8().jet(1, 1, x - h).d2) / (2.0 * h);
    cplx ratio = u.evaluator(x) / basis8().eval(1, 1, x);
    cplx defect = iu * d3 * ratio + alpha * proj * v.sampler(x) - mu * u.evaluator(x);
    CHECK(std::abs(defect) < 1e-3 * (1.0 + mu * std::abs(u.evaluator(x))));
  }

  try {
    eigenfunction_alpha(sd, mu + 1.0, basis8());
    FAIL("expected a failure away from the secular roots");
  } catch (const Failure& f) {
    CHECK(f.code() == Err::not_a_secular_root);
  }
}

TEST_CASE("perturbed resolvent: exact mode shifts", "[resolvent]") {
  Potential v = mode_potential(1);
  const double alpha = 1.0;
  cplx lambda(77.0, 3.0);
  double l1 = basis8().lambda_of(1), l2 = basis8().lambda_of(2);

  // A mode orthogonal to the potential passes through unchanged.
  auto f2 = [](double x) { return basis8().eval(2, 1, x); };
  auto r2 = resolvent_alpha(basis8(), v, alpha, f2, lambda);
  for (double x : {0.2, 0.6, 0.95})
    CHECK(std::abs(r2(x) - f2(x) / (l2 - lambda)) < 1e-8);

  // The coupled mode sees the shifted eigenvalue.
  auto f1 = [](double x) { return basis8().eval(1, 1, x); };
  auto r1 = resolvent_alpha(basis8(), v, alpha, f1, lambda);
  for (double x : {0.2, 0.6, 0.95})
    CHECK(std::abs(r1(x) - f1(x) / (l1 + alpha - lambda)) < 1e-8);
}

TEST_CASE("perturbed resolvent: operator defect for generic data", "[resolvent]") {
  Potential v = constant_one();
  const double alpha = 0.7;
  cplx lambda(30.0, 5.0);
  auto f = [](double x) { return cplx(std::cos(3.0 * x), 0.2 - x); };
  auto y = resolvent_alpha(basis8(), v, alpha, f, lambda);
  const CompositeRule& r = default_rule();
  cplx proj = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j)
    proj += r.w[j] * y(r.x[j]) * std::conj(v.sampler(r.x[j]));
  const double w[7] = {1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0};
  const double h = 1e-3;
  for (double x0 : {0.3, 0.55, 0.8}) {
    cplx d3 = 0.0;
    for (int j = -3; j <= 3; ++j) d3 += w[j + 3] * y(x0 + j * h);
    d3 /= h * h * h;
    cplx defect = iu * d3 + alpha * proj * v.sampler(x0) - lambda * y(x0) - f(x0);
    CHECK(std::abs(defect) < 1e-4 * (1.0 + std::abs(f(x0)) + std::abs(lambda * y(x0))));
  }
}
