#pragma once

#include <cmath>
#include <complex>

#include "cubicspec/types.hpp"

namespace cubicspec {

// The generalized trigonometric trio c, s, d: fundamental solutions of
// f''' = f with initial-condition matrix I3.  Equivalently the three
// series sum_z^{3n}/(3n)!, z^{3n+1}/(3n+1)!, z^{3n+2}/(3n+2)!.
struct CsdTriple {
  cplx c, s, d;
};

namespace detail {
// omega = exp(2*pi*i/3); the conjugate pair drives the exponential-sum form.
inline const cplx omega{-0.5, 0.8660254037844386467637231707529362};
inline const cplx omega2{-0.5, -0.8660254037844386467637231707529362};
}  // namespace detail

// Evaluation strategy: Taylor partial sums inside the unit disc (cancellation
// in the exponential sum is worst near 0), exact exponential combination
// elsewhere.  Both are entire; the crossover is continuous to ~1e-15.
inline CsdTriple eval_csd(cplx z) {
  using detail::omega;
  using detail::omega2;
  if (std::abs(z) < 1.0) {
    cplx z3 = z * z * z;
    cplx tc = 1.0, ts = z, td = z * z / 2.0;
    cplx c = tc, s = ts, d = td;
    for (int n = 1; n < 24; ++n) {
      double m = 3.0 * n;
      tc *= z3 / ((m - 2.0) * (m - 1.0) * m);
      ts *= z3 / ((m - 1.0) * m * (m + 1.0));
      td *= z3 / (m * (m + 1.0) * (m + 2.0));
      c += tc;
      s += ts;
      d += td;
      if (std::abs(tc) + std::abs(ts) + std::abs(td) < 1e-18) break;
    }
    return {c, s, d};
  }
  cplx e1 = std::exp(omega * z);
  cplx e2 = std::exp(omega2 * z);
  cplx e3 = std::exp(z);
  cplx c = (e1 + e2 + e3) / 3.0;
  // 1/omega = omega2 and vice versa.
  cplx s = (omega2 * e1 + omega * e2 + e3) / 3.0;
  cplx d = (omega * e1 + omega2 * e2 + e3) / 3.0;
  return {c, s, d};
}

}  // namespace cubicspec
