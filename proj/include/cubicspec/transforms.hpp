#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cubicspec/potential.hpp"
#include "cubicspec/quadrature.hpp"
#include "cubicspec/solutions.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// plain:     t_i = <v, y_i(., conj lambda)> = integral v(t) y_i(t, -lambda) dt
// starred:   t_i = <y_i(., lambda), v>      = integral y_i(t, lambda) conj(v(t)) dt
// reflected: plain flavor of the flipped function v(1-.)
// plain and starred are related by the involution f*(l) = conj(f(conj l)),
// componentwise.
enum class Flavor { plain, starred, reflected };

struct TransformTriple {
  cplx t1{0.0}, t2{0.0}, t3{0.0};
  Flavor flavor = Flavor::plain;
  double quad_err = 0.0;
};

struct ValueWithError {
  cplx value{0.0};
  double err = 0.0;
};

namespace detail {

inline TransformTriple transform_on_rule(const Potential& v, cplx lambda, Flavor fl, const CompositeRule& r) {
  cplx lam_arg = (fl == Flavor::starred) ? lambda : -lambda;
  TransformTriple out;
  out.flavor = fl;
  for (std::size_t j = 0; j < r.size(); ++j) {
    double t = r.x[j];
    SolutionTriple y = eval_solutions(t, lam_arg);
    cplx f;
    switch (fl) {
      case Flavor::plain: f = v(t); break;
      case Flavor::starred: f = std::conj(v(t)); break;
      default: f = v(1.0 - t); break;
    }
    out.t1 += r.w[j] * f * y.y1;
    out.t2 += r.w[j] * f * y.y2;
    out.t3 += r.w[j] * f * y.y3;
  }
  return out;
}

inline const CompositeRule& half_rule(const CompositeRule& r) {
  // Cache keyed on panel count; the suite only ever uses a few rules.
  static thread_local CompositeRule cached;
  int p = std::max(1, r.panels / 2);
  if (cached.panels != p || cached.order != r.order) cached = make_rule(p, r.order);
  return cached;
}

inline cplx m_on_rule(const Potential& v, cplx lambda, const CompositeRule& r) {
  // m(lambda) = <conv, v>, conv(x) = integral_0^x y3(x-t, lambda) v(t) dt.
  // The kernel splits by the addition rule,
  //   y3(x-t) = y1(x) y3(-t) + y2(x) y2(-t) + y3(x) y1(-t),
  // so conv needs only running integrals F_j(x) = integral_0^x y_j(-t) v(t) dt,
  // accumulated panel by panel with the partial-panel matrix.
  const auto S = partial_integration_matrix(r.ref_x);
  const int ord = r.order;
  const double hh = 0.5 / r.panels;  // panel half-width
  cplx F1 = 0.0, F2 = 0.0, F3 = 0.0;
  cplx acc = 0.0;
  std::vector<cplx> g1(ord), g2(ord), g3(ord);
  for (int p = 0; p < r.panels; ++p) {
    for (int j = 0; j < ord; ++j) {
      double t = r.x[static_cast<std::size_t>(p) * ord + j];
      SolutionTriple y = eval_solutions(-t, lambda);
      cplx vt = v(t);
      g1[j] = y.y1 * vt;
      g2[j] = y.y2 * vt;
      g3[j] = y.y3 * vt;
    }
    for (int m = 0; m < ord; ++m) {
      std::size_t idx = static_cast<std::size_t>(p) * ord + m;
      double x = r.x[idx];
      cplx P1 = F1, P2 = F2, P3 = F3;
      for (int j = 0; j < ord; ++j) {
        P1 += hh * S[m][j] * g1[j];
        P2 += hh * S[m][j] * g2[j];
        P3 += hh * S[m][j] * g3[j];
      }
      SolutionTriple y = eval_solutions(x, lambda);
      cplx conv = y.y1 * P3 + y.y2 * P2 + y.y3 * P1;
      acc += r.w[idx] * conv * std::conj(v(x));
    }
    for (int j = 0; j < ord; ++j) {
      F1 += hh * r.ref_w[j] * g1[j];
      F2 += hh * r.ref_w[j] * g2[j];
      F3 += hh * r.ref_w[j] * g3[j];
    }
  }
  return acc;
}

}  // namespace detail

inline TransformTriple fourier_transforms(const Potential& v, cplx lambda, Flavor fl,
                                          const CompositeRule& rule = default_rule()) {
  if (!v.has_sampler()) fail(Err::missing_sampler, "fourier_transforms needs pointwise potential values");
  TransformTriple fine = detail::transform_on_rule(v, lambda, fl, rule);
  TransformTriple half = detail::transform_on_rule(v, lambda, fl, detail::half_rule(rule));
  fine.quad_err = std::max({std::abs(fine.t1 - half.t1), std::abs(fine.t2 - half.t2),
                            std::abs(fine.t3 - half.t3)});
  return fine;
}

inline ValueWithError m_functional(const Potential& v, cplx lambda,
                                   const CompositeRule& rule = default_rule()) {
  if (!v.has_sampler()) fail(Err::missing_sampler, "m_functional needs pointwise potential values");
  cplx fine = detail::m_on_rule(v, lambda, rule);
  cplx half = detail::m_on_rule(v, lambda, detail::half_rule(rule));
  return {fine, std::abs(fine - half)};
}

// Involution partner: m*(lambda) = conj(m(conj lambda)).
inline ValueWithError m_star_functional(const Potential& v, cplx lambda,
                                        const CompositeRule& rule = default_rule()) {
  ValueWithError m = m_functional(v, std::conj(lambda), rule);
  return {std::conj(m.value), m.err};
}

}  // namespace cubicspec
