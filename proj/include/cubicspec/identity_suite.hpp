#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "cubicspec/complex_trig.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// Normalized residuals of the nine defining relations of the c/s/d trio,
// sampled at random points of a disc.  Relation 1 (the derivative cycle) is
// checked through central differences and lives on its own, looser scale.
struct IdentityReport {
  int samples = 0;
  double radius = 0.0;
  std::array<double, 9> residual{};  // [i] = relation i+1
  double max_derivative = 0.0;       // relation 1
  double max_algebraic = 0.0;        // relations 2..9
};

namespace detail {

// Long-double Taylor partial sums; the independent reference for relation 9.
inline CsdTriple csd_taylor_reference(cplx z) {
  std::complex<long double> zl(z.real(), z.imag());
  std::complex<long double> z3 = zl * zl * zl;
  std::complex<long double> tc = 1.0L, ts = zl, td = zl * zl / 2.0L;
  std::complex<long double> c = tc, s = ts, d = td;
  for (int n = 1; n < 60; ++n) {
    long double m = 3.0L * n;
    tc *= z3 / ((m - 2.0L) * (m - 1.0L) * m);
    ts *= z3 / ((m - 1.0L) * m * (m + 1.0L));
    td *= z3 / (m * (m + 1.0L) * (m + 2.0L));
    c += tc;
    s += ts;
    d += td;
    if (std::abs(tc) + std::abs(ts) + std::abs(td) < 1e-24L) break;
  }
  return {cplx(double(c.real()), double(c.imag())), cplx(double(s.real()), double(s.imag())),
          cplx(double(d.real()), double(d.imag()))};
}

inline double rel_err(cplx got, cplx want) {
  return std::abs(got - want) / (1.0 + std::abs(want));
}

// Backward-error normalization for relations built from products: roundoff is
// proportional to the largest participating term, not to the (possibly
// cancelled) result.
inline double resid(cplx lhs, cplx rhs, double term_scale) {
  return std::abs(lhs - rhs) / (1.0 + term_scale + std::abs(rhs));
}

}  // namespace detail

inline IdentityReport run_identity_suite(int samples = 200, double radius = 10.0,
                                         unsigned seed = 20260822u) {
  using detail::rel_err;
  const cplx om = detail::omega;
  const cplx om2 = detail::omega2;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    double r = radius * std::sqrt(unit(rng));
    double th = 2.0 * pi * unit(rng);
    return std::polar(r, th);
  };

  IdentityReport rep;
  rep.samples = samples;
  rep.radius = radius;
  auto note = [&](int relation, double r) {
    double& slot = rep.residual[static_cast<std::size_t>(relation - 1)];
    if (r > slot) slot = r;
  };

  const double h = 1e-6;
  for (int i = 0; i < samples; ++i) {
    cplx z = draw();
    CsdTriple t = eval_csd(z);

    // (1) derivative cycle s'=c, d'=s, c'=d by central differences.
    CsdTriple tp = eval_csd(z + h), tm = eval_csd(z - h);
    note(1, rel_err((tp.s - tm.s) / (2.0 * h), t.c));
    note(1, rel_err((tp.d - tm.d) / (2.0 * h), t.s));
    note(1, rel_err((tp.c - tm.c) / (2.0 * h), t.d));

    // (2) conjugation symmetry.
    CsdTriple tc = eval_csd(std::conj(z));
    note(2, rel_err(std::conj(t.c), tc.c));
    note(2, rel_err(std::conj(t.s), tc.s));
    note(2, rel_err(std::conj(t.d), tc.d));

    // (3) rotation by a cube root of unity.
    CsdTriple tw = eval_csd(om * z);
    note(3, rel_err(tw.c, t.c));
    note(3, rel_err(tw.s, om * t.s));
    note(3, rel_err(tw.d, om2 * t.d));

    // (4) Euler's formula for all three roots of unity.
    double s4 = std::abs(t.c) + std::abs(t.s) + std::abs(t.d);
    note(4, detail::resid(t.c + om * t.s + om2 * t.d, std::exp(om * z), s4));
    note(4, detail::resid(t.c + om2 * t.s + om * t.d, std::exp(om2 * z), s4));
    note(4, detail::resid(t.c + t.s + t.d, std::exp(z), s4));

    // (5) the main identity.
    cplx lhs = t.c * t.c * t.c + t.s * t.s * t.s + t.d * t.d * t.d - 3.0 * t.c * t.s * t.d;
    double scale5 = std::pow(std::abs(t.c), 3) + std::pow(std::abs(t.s), 3) +
                    std::pow(std::abs(t.d), 3) + 3.0 * std::abs(t.c * t.s * t.d);
    note(5, detail::resid(lhs, 1.0, scale5));

    // (6) summation formulas at an independent second point.
    cplx z2 = draw();
    CsdTriple u = eval_csd(z2);
    CsdTriple w = eval_csd(z + z2);
    double s6 = (std::abs(t.c) + std::abs(t.s) + std::abs(t.d)) *
                (std::abs(u.c) + std::abs(u.s) + std::abs(u.d));
    note(6, detail::resid(t.c * u.c + t.s * u.d + t.d * u.s, w.c, s6));
    note(6, detail::resid(t.c * u.s + t.s * u.c + t.d * u.d, w.s, s6));
    note(6, detail::resid(t.c * u.d + t.s * u.s + t.d * u.c, w.d, s6));

    // (7) doubling formulas.
    CsdTriple t2 = eval_csd(2.0 * z);
    CsdTriple tn = eval_csd(-z);
    note(7, detail::resid(3.0 * t.c * t.c, t2.c + 2.0 * tn.c, 3.0 * std::norm(t.c)));
    note(7, detail::resid(3.0 * t.s * t.s, t2.d + 2.0 * tn.d, 3.0 * std::norm(t.s)));
    note(7, detail::resid(3.0 * t.d * t.d, t2.s + 2.0 * tn.s, 3.0 * std::norm(t.d)));

    // (8) reduction formulas.
    double s8 = s4 * s4;
    note(8, detail::resid(t.c * t.c - t.s * t.d, tn.c, s8));
    note(8, detail::resid(t.d * t.d - t.s * t.c, tn.s, s8));
    note(8, detail::resid(t.s * t.s - t.d * t.c, tn.d, s8));

    // (9) Taylor reference in extended precision.
    CsdTriple ref = detail::csd_taylor_reference(z);
    note(9, rel_err(t.c, ref.c));
    note(9, rel_err(t.s, ref.s));
    note(9, rel_err(t.d, ref.d));
  }

  rep.max_derivative = rep.residual[0];
  for (int r = 2; r <= 9; ++r)
    rep.max_algebraic = std::max(rep.max_algebraic, rep.residual[static_cast<std::size_t>(r - 1)]);
  return rep;
}

}  // namespace cubicspec
