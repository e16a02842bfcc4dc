// Watch the spectrum respond to the coupling strength.
//
// A rank-one perturbation removes each eigenvalue the potential touches and
// plants exactly one replacement root in every gap between touched
// eigenvalues.  For a single-mode potential the replacement moves linearly
// with alpha; for a two-mode potential the zero eigenvalue can be driven into
// a triple root by tuning alpha to a critical value.

#include <cmath>
#include <cstdio>

#include "cubicspec/perturbation.hpp"
#include "cubicspec/spectrum_l0.hpp"

using namespace cubicspec;

namespace {

const PerturbedEntry* find_class(const PerturbedSpectrum& ps, EigClass cls) {
  for (const auto& e : ps.entries)
    if (e.cls == cls) return &e;
  return nullptr;
}

int zero_mult(const PerturbedSpectrum& ps) {
  for (const auto& e : ps.entries)
    if (e.lambda == 0.0) return e.mult;
  return 0;
}

}  // namespace

int main() {
  ModeBasisL0 basis(eigs_l0(6));
  double l1 = basis.lambda_of(1);
  double l2 = basis.lambda_of(2);

  // 1) single mode: the eigenvalue under the potential moves by exactly alpha
  Potential u1;
  u1.coeff[1] = 1.0;
  u1.cutoff = 1;
  std::printf("single-mode potential, eigenvalue %.4f under the coupling:\n", l1);
  std::printf("  %8s  %14s  %14s\n", "alpha", "moved root", "lam1 + alpha");
  for (double alpha : {-2.0, -0.5, 0.5, 1.0, 2.0}) {
    PerturbedSpectrum ps = spectrum_alpha(u1, alpha, 6, -1.0, &basis);
    const PerturbedEntry* moved = find_class(ps, EigClass::sigma2_simple);
    std::printf("  %8.2f  %14.6f  %14.6f\n", alpha, moved ? moved->lambda : 0.0, l1 + alpha);
  }

  // 2) two modes: sweep alpha toward the value where the root created in the
  //    gap and the double eigenvalue at zero merge into a triple root
  Potential pair;
  pair.coeff[1] = 1.0 / std::sqrt(2.0);
  pair.coeff[2] = 1.0 / std::sqrt(2.0);
  pair.cutoff = 2;
  double critical = -2.0 / (1.0 / l1 + 1.0 / l2);
  std::printf("\ntwo-mode potential, gap (%.2f, %.2f), critical alpha %.4f:\n", l1, l2, critical);
  std::printf("  %12s  %14s  %10s\n", "alpha", "gap root", "mult at 0");
  for (double f : {0.25, 0.5, 0.75, 0.9, 0.99, 1.0}) {
    double alpha = f * critical;
    PerturbedSpectrum ps = spectrum_alpha(pair, alpha, 6, -1.0, &basis);
    double gap_root = 0.0;
    for (const auto& e : ps.entries)
      if (e.cls == EigClass::sigma2_simple && e.lambda > l1 && e.lambda < l2) gap_root = e.lambda;
    std::printf("  %12.4f  %14.6f  %10d\n", alpha, gap_root, zero_mult(ps));
  }
  return 0;
}
