#pragma once

#include <cmath>
#include <complex>

#include "cubicspec/complex_trig.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// Principal cube root: argument mapped into (-pi/3, pi/3].  Any of the three
// roots yields the same solution triple (tested invariant); this one is the
// deterministic choice.
inline cplx cube_root(cplx z) {
  if (z == cplx(0.0)) return 0.0;
  double r = std::abs(z);
  double th = std::arg(z);
  return std::polar(std::cbrt(r), th / 3.0);
}

// Fundamental solutions of i*f''' = lambda*f with f-matrix initial data at 0:
//   y1 = c(ikx), y2 = s(ikx)/(ik), y3 = d(ikx)/(ik)^2,  k^3 = lambda.
// All three are entire in lambda; the k-branch cancels.
struct SolutionTriple {
  cplx y1, y2, y3;
};

// x may be any real (transform kernels evaluate at reflected arguments).
inline SolutionTriple eval_solutions(double x, cplx lambda) {
  if (std::abs(lambda) <= 1.0) {
    // Branch-free form: y_j = sum_n (-i*lambda)^n x^(3n+j-1)/(3n+j-1)!.
    // Converges fast for |lambda| <= 1, |x| <= a few units, and is the
    // correct lambda -> 0 limit (1, x, x^2/2) term by term.
    cplx q = -iu * lambda;
    cplx t1 = 1.0, t2 = x, t3 = x * x / 2.0;
    cplx y1 = t1, y2 = t2, y3 = t3;
    cplx qx3 = q * x * x * x;
    for (int n = 1; n < 24; ++n) {
      double m = 3.0 * n;
      t1 *= qx3 / ((m - 2.0) * (m - 1.0) * m);
      t2 *= qx3 / ((m - 1.0) * m * (m + 1.0));
      t3 *= qx3 / (m * (m + 1.0) * (m + 2.0));
      y1 += t1;
      y2 += t2;
      y3 += t3;
      if (std::abs(t1) + std::abs(t2) + std::abs(t3) < 1e-18) break;
    }
    return {y1, y2, y3};
  }
  cplx ik = iu * cube_root(lambda);
  CsdTriple t = eval_csd(ik * x);
  return {t.c, t.s / ik, t.d / (ik * ik)};
}

// First and second derivatives in x via the cyclic relations
//   y1' = -i*lambda*y3, y2' = y1, y3' = y2,
//   y1'' = -i*lambda*y2, y2'' = -i*lambda*y3, y3'' = y1.
struct SolutionJet {
  SolutionTriple y, dy, d2y;
};

inline SolutionJet eval_solution_jet(double x, cplx lambda) {
  SolutionTriple y = eval_solutions(x, lambda);
  cplx q = -iu * lambda;
  return {y, {q * y.y3, y.y1, y.y2}, {q * y.y2, q * y.y3, y.y1}};
}

}  // namespace cubicspec
