#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>

#include "cubicspec/quadrature.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// Orthonormal zero modes of the unperturbed operator.
inline cplx zero_mode_1(double) { return 1.0; }
inline cplx zero_mode_2(double x) { return std::sqrt(3.0) * iu * (2.0 * x - 1.0); }

// Evaluates the orthonormal mode u_n (branch 1 or 2; branch 2 exists only for
// n=0) at a point x.  Supplied by whoever owns the spectrum, so that potential
// synthesis does not depend on the spectrum module.
using ModeEvaluator = std::function<cplx(int n, int branch, double x)>;

// A function v on [0,1] held as eigenbasis coefficients (v0 has two
// components, one per zero mode) and/or a pointwise sampler.
struct Potential {
  cplx v01{0.0}, v02{0.0};
  std::map<int, cplx> coeff;  // n != 0 only
  int cutoff = 0;             // largest |n| carried by coeff
  std::function<cplx(double)> sampler;

  bool has_coefficients() const {
    return v01 != 0.0 || v02 != 0.0 || !coeff.empty();
  }
  bool has_sampler() const { return static_cast<bool>(sampler); }

  cplx operator()(double x) const {
    if (!sampler) fail(Err::missing_sampler, "potential has no sampler; synthesize from coefficients first");
    return sampler(x);
  }

  // Exact in the coefficient representation (orthonormal basis).
  double coefficient_norm() const {
    double s = std::norm(v01) + std::norm(v02);
    for (const auto& [n, c] : coeff) s += std::norm(c);
    return std::sqrt(s);
  }
};

inline Potential make_sampled(std::function<cplx(double)> f) {
  Potential v;
  v.sampler = std::move(f);
  return v;
}

// Materializes a sampler for a coefficient-form potential.  The callback
// breaks the cycle with the spectrum module, which knows the modes.
inline std::function<cplx(double)> synthesized_sampler(const Potential& v, const ModeEvaluator& modes) {
  struct Data {
    cplx v01, v02;
    std::map<int, cplx> coeff;
    ModeEvaluator modes;
  };
  Data d{v.v01, v.v02, v.coeff, modes};
  return [d = std::move(d)](double x) {
    cplx s = d.v01 * d.modes(0, 1, x) + d.v02 * d.modes(0, 2, x);
    for (const auto& [n, c] : d.coeff) s += c * d.modes(n, 1, x);
    return s;
  };
}

inline void ensure_sampler(Potential& v, const ModeEvaluator& modes) {
  if (!v.has_sampler()) v.sampler = synthesized_sampler(v, modes);
}

inline double l2_norm(const Potential& v, const CompositeRule& rule = default_rule()) {
  if (v.has_sampler()) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.w[i] * std::norm(v.sampler(rule.x[i]));
    return std::sqrt(s);
  }
  return v.coefficient_norm();
}

}  // namespace cubicspec
