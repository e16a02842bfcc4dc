#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cubicspec/potential.hpp"
#include "cubicspec/quadrature.hpp"
#include "cubicspec/spectrum_l0.hpp"
#include "cubicspec/transforms.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// ---------------------------------------------------------------------------
// Secular data: poles and weights of Q(lambda) = 1 + alpha sum w_n/(l_n - l).
// ---------------------------------------------------------------------------

struct SecularTerm {
  int n = 0;
  double lambda = 0.0;
  double weight = 0.0;  // |v_n|^2 (for n=0: |v01|^2 + |v02|^2)
  cplx v1{0.0};         // coefficient itself; for n=0 the first zero branch
  cplx v2{0.0};         // second zero branch, n=0 only
};

struct SecularData {
  double alpha = 0.0;
  std::vector<SecularTerm> support;  // ascending lambda
  double zero_weight = 0.0;
  bool zero_in_sigma1 = false;
  int cutoff = 0;
  double tail_norm = 0.0;  // sum weights + tail_norm^2 = ||v||^2
};

struct SigmaSplit {
  std::vector<int> sigma0;  // mode indices with vanishing coefficient
  SecularData sd;
};

inline SigmaSplit split_sigma(const Potential& v, const SpectrumL0& spec0, double zero_tol) {
  if (!v.has_coefficients() && v.has_sampler())
    fail(Err::bad_potential_format, "split_sigma needs the coefficient form; project the sampler first");
  SigmaSplit out;
  double captured = 0.0;
  for (const auto& e : spec0.entries) {
    if (e.n == 0) {
      double w0 = std::norm(v.v01) + std::norm(v.v02);
      captured += w0;
      if (std::abs(v.v01) <= zero_tol && std::abs(v.v02) <= zero_tol) {
        out.sigma0.push_back(0);
      } else {
        out.sd.zero_in_sigma1 = true;
        out.sd.zero_weight = w0;
        out.sd.support.push_back({0, 0.0, w0, v.v01, v.v02});
      }
      continue;
    }
    auto it = v.coeff.find(e.n);
    cplx c = (it == v.coeff.end()) ? cplx(0.0) : it->second;
    captured += std::norm(c);
    if (std::abs(c) <= zero_tol) {
      out.sigma0.push_back(e.n);
    } else {
      out.sd.support.push_back({e.n, e.lambda, std::norm(c), c, 0.0});
    }
  }
  std::sort(out.sd.support.begin(), out.sd.support.end(),
            [](const SecularTerm& a, const SecularTerm& b) { return a.lambda < b.lambda; });
  out.sd.cutoff = spec0.n_max();
  double total = l2_norm(v);
  out.sd.tail_norm = std::sqrt(std::max(0.0, total * total - captured));
  return out;
}

// ---------------------------------------------------------------------------
// Secular function.
// ---------------------------------------------------------------------------

struct QValue {
  cplx value{0.0};
  double tail_bound = 0.0;
};

inline QValue q_eval(const SecularData& sd, cplx lambda) {
  cplx acc = 1.0;
  for (const auto& t : sd.support) {
    if (std::abs(lambda - t.lambda) < 1e-12)
      fail(Err::on_pole, "secular function evaluated on a support point");
    acc += sd.alpha * t.weight / (t.lambda - lambda);
  }
  // Uncomputed poles live on the real axis beyond the bracketing interval of
  // the cutoff index; distance to that region certifies the truncation error.
  double edge = (2.0 * sd.cutoff + 1.0) * pi;
  double lam_edge = edge * edge * edge;
  double dist;
  if (std::abs(lambda.real()) >= lam_edge) {
    dist = std::abs(lambda.imag());
  } else {
    dist = std::hypot(lam_edge - std::abs(lambda.real()), lambda.imag());
  }
  double bound = (dist > 0.0) ? std::abs(sd.alpha) * sd.tail_norm * sd.tail_norm / dist
                              : std::numeric_limits<double>::infinity();
  return {acc, bound};
}

namespace detail {

// Real-axis Q without the pole guard; root brackets manage their own offsets.
inline double q_real(const SecularData& sd, double lambda) {
  double acc = 1.0;
  for (const auto& t : sd.support) acc += sd.alpha * t.weight / (t.lambda - lambda);
  return acc;
}

inline double q_slope(const SecularData& sd, double lambda) {
  double acc = 0.0;
  for (const auto& t : sd.support) {
    double d = t.lambda - lambda;
    acc += sd.alpha * t.weight / (d * d);
  }
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Characteristic function of the perturbed operator.
// ---------------------------------------------------------------------------

namespace detail {

inline cplx big_f(const Potential& v, cplx lambda, const CompositeRule& rule) {
  TransformTriple st = fourier_transforms(v, lambda, Flavor::starred, rule);
  TransformTriple re = fourier_transforms(v, -lambda, Flavor::reflected, rule);
  cplx y21 = eval_solutions(1.0, lambda).y2;
  cplx m = m_on_rule(v, lambda, rule);
  return st.t1 * re.t1 + iu * lambda * y21 * m;
}

}  // namespace detail

// delta_alpha = delta0 + i*alpha*(F - F*), where F* is the involution partner
// conj(F(conj lambda)).  Real on the real axis; agrees with Q * delta0.
inline cplx delta_alpha(const Potential& v, double alpha, cplx lambda,
                        const CompositeRule& rule = default_rule()) {
  if (!v.has_sampler()) fail(Err::missing_sampler, "delta_alpha needs pointwise potential values");
  if (alpha == 0.0) return delta0(lambda);
  if (lambda.imag() == 0.0) {
    cplx f = detail::big_f(v, lambda, rule);
    return cplx(delta0(lambda).real() - 2.0 * alpha * f.imag(), 0.0);
  }
  cplx f = detail::big_f(v, lambda, rule);
  cplx fstar = std::conj(detail::big_f(v, std::conj(lambda), rule));
  return delta0(lambda) + iu * alpha * (f - fstar);
}

// ---------------------------------------------------------------------------
// Perturbed spectrum with multiplicity classes.
// ---------------------------------------------------------------------------

enum class EigClass { sigma0_simple, sigma2_simple, double_coincidence, zero_special };

inline const char* eig_class_name(EigClass c) {
  switch (c) {
    case EigClass::sigma0_simple: return "sigma0_simple";
    case EigClass::sigma2_simple: return "sigma2_simple";
    case EigClass::double_coincidence: return "double_coincidence";
    case EigClass::zero_special: return "zero_special";
  }
  return "unknown";
}

struct PerturbedEntry {
  double lambda = 0.0;
  int mult = 1;
  EigClass cls = EigClass::sigma0_simple;
  double margin = 0.0;  // distance to the nearest classification boundary
};

struct PerturbedSpectrum {
  double alpha = 0.0;
  double coincidence_tol = -1.0;  // <= 0 means scaled default 1e-8*(1+|lambda|)
  std::vector<PerturbedEntry> entries;  // ascending lambda
  std::string note;

  double tol_at(double lambda) const {
    return (coincidence_tol > 0.0) ? coincidence_tol : 1e-8 * (1.0 + std::abs(lambda));
  }
};

namespace detail {

// One secular root strictly inside (lo, hi); Q is monotone there (sign of
// alpha), diverging at both poles.  Offsets shrink until the pole sign shows.
inline bool secular_root_in_gap(const SecularData& sd, double lo, double hi, bool lo_is_pole,
                                bool hi_is_pole, double& root) {
  double gap = hi - lo;
  double dlo = lo_is_pole ? gap * 1e-3 : 0.0;
  double dhi = hi_is_pole ? gap * 1e-3 : 0.0;
  double sign_at_pole = (sd.alpha > 0.0) ? -1.0 : 1.0;  // limit from above a pole
  double a = lo + dlo, fa = q_real(sd, a);
  for (int it = 0; it < 40 && lo_is_pole && fa * sign_at_pole < 0.0; ++it) {
    dlo *= 0.1;
    if (dlo < gap * 1e-15) break;
    a = lo + dlo;
    fa = q_real(sd, a);
  }
  double b = hi - dhi, fb = q_real(sd, b);
  for (int it = 0; it < 40 && hi_is_pole && fb * (-sign_at_pole) < 0.0; ++it) {
    dhi *= 0.1;
    if (dhi < gap * 1e-15) break;
    b = hi - dhi;
    fb = q_real(sd, b);
  }
  if (!(fa * fb < 0.0)) return false;
  for (int it = 0; it < 200 && (b - a) > 1e-16 * (std::abs(a) + std::abs(b)); ++it) {
    double mid = 0.5 * (a + b);
    double fm = q_real(sd, mid);
    if (fm == 0.0) {
      a = b = mid;
      break;
    }
    if (fa * fm < 0.0) {
      b = mid;
      fb = fm;
    } else {
      a = mid;
      fa = fm;
    }
  }
  // One Newton step sharpens the bisection limit when the slope is healthy.
  double r = 0.5 * (a + b);
  double s = q_slope(sd, r);
  if (s != 0.0) {
    double step = q_real(sd, r) / s;
    if (std::abs(step) < (b - a) + 1e-12 * (1.0 + std::abs(r))) r -= step;
  }
  root = r;
  return true;
}

}  // namespace detail

inline PerturbedSpectrum spectrum_alpha(const Potential& v, double alpha, int n_max,
                                        double coincidence_tol = -1.0,
                                        const ModeBasisL0* basis = nullptr) {
  PerturbedSpectrum out;
  out.alpha = alpha;
  out.coincidence_tol = coincidence_tol;

  // Coefficient form of v over the working spectrum.
  Potential vc = v;
  SpectrumL0 spec0;
  if (basis && basis->n_max() >= n_max) {
    spec0 = basis->spectrum();
    if (basis->n_max() > n_max) {
      // The caller asked for a narrower window than the basis provides.
      std::erase_if(spec0.entries, [n_max](const L0Entry& e) { return std::abs(e.n) > n_max; });
    }
    if (!vc.has_coefficients() && vc.has_sampler()) vc = coefficients_of(v.sampler, *basis);
  } else {
    spec0 = eigs_l0(n_max);
    if (!vc.has_coefficients() && vc.has_sampler()) {
      ModeBasisL0 local(spec0);
      vc = coefficients_of(v.sampler, local);
    }
  }
  SigmaSplit split = split_sigma(vc, spec0, 1e-9);
  SecularData sd = split.sd;
  sd.alpha = alpha;

  bool zero_in_sigma0 =
      std::find(split.sigma0.begin(), split.sigma0.end(), 0) != split.sigma0.end();

  // Secular roots: one per interior gap, one outer root on the side matching
  // the sign of alpha.  The outer root sits within |alpha|*||v||^2 of the end
  // pole, so the window 2|alpha|(1+||v||^2)+1 always brackets it.
  std::vector<double> roots;
  if (alpha != 0.0 && !sd.support.empty()) {
    for (std::size_t i = 0; i + 1 < sd.support.size(); ++i) {
      double r;
      if (detail::secular_root_in_gap(sd, sd.support[i].lambda, sd.support[i + 1].lambda, true,
                                      true, r))
        roots.push_back(r);
    }
    double norm2 = 0.0;
    for (const auto& t : sd.support) norm2 += t.weight;
    norm2 += sd.tail_norm * sd.tail_norm;
    double window = 2.0 * std::abs(alpha) * (1.0 + norm2) + 1.0;
    if (sd.support.size() >= 2) {
      double mean_gap =
          (sd.support.back().lambda - sd.support.front().lambda) / (sd.support.size() - 1.0);
      window = std::max(window, 3.0 * mean_gap);
    }
    double r;
    if (alpha > 0.0) {
      double end = sd.support.back().lambda;
      if (detail::secular_root_in_gap(sd, end, end + window, true, false, r)) roots.push_back(r);
    } else {
      double end = sd.support.front().lambda;
      if (detail::secular_root_in_gap(sd, end - window, end, false, true, r)) roots.push_back(r);
    }
  }

  // Scale-aware test for Q(0) = 0 (the triple-degeneracy decision at zero).
  double q0 = 0.0, q0_scale = 1.0;
  if (!sd.zero_in_sigma1) {
    q0 = detail::q_real(sd, 0.0);
    q0_scale = 1.0;
    for (const auto& t : sd.support)
      q0_scale += std::abs(alpha) * t.weight / std::max(1.0, std::abs(t.lambda));
  }
  double base_tol = (coincidence_tol > 0.0) ? coincidence_tol : 1e-8;
  bool zero_triple = zero_in_sigma0 && std::abs(q0) <= base_tol * q0_scale;

  // Assemble: surviving unperturbed points, the zero cases, and the new roots
  // (merged onto coinciding survivors).
  std::vector<PerturbedEntry> entries;
  for (int n : split.sigma0) {
    if (n == 0) continue;
    entries.push_back({spec0.at(n).lambda, 1, EigClass::sigma0_simple, 0.0});
  }
  PerturbedEntry zero;
  zero.lambda = 0.0;
  zero.cls = EigClass::zero_special;
  if (zero_in_sigma0) {
    zero.mult = zero_triple ? 3 : 2;
    zero.margin = std::abs(q0);
  } else {
    zero.mult = 1;
    zero.margin = sd.zero_weight;
  }
  entries.push_back(zero);

  for (double mu : roots) {
    if (zero_in_sigma0 && zero_triple && std::abs(mu) <= out.tol_at(0.0)) continue;  // counted at 0
    if (sd.zero_in_sigma1 && std::abs(mu) <= out.tol_at(0.0))
      out.note = "secular root within tolerance of the zero pole; kept as sigma2_simple";
    PerturbedEntry* host = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (auto& e : entries) {
      if (e.cls != EigClass::sigma0_simple) continue;
      double d = std::abs(e.lambda - mu);
      if (d < best) {
        best = d;
        host = &e;
      }
    }
    if (host && best <= out.tol_at(mu)) {
      host->mult = 2;
      host->cls = EigClass::double_coincidence;
      host->margin = best;
    } else {
      entries.push_back({mu, 1, EigClass::sigma2_simple, best});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const PerturbedEntry& a, const PerturbedEntry& b) { return a.lambda < b.lambda; });
  out.entries = std::move(entries);
  return out;
}

// ---------------------------------------------------------------------------
// Perturbed eigenfunctions (new eigenvalues only).
// ---------------------------------------------------------------------------

struct EigenfunctionAlpha {
  double mu = 0.0;
  double g_prime = 0.0;
  std::function<cplx(double)> evaluator;
  double norm_check = 0.0;
};

inline EigenfunctionAlpha eigenfunction_alpha(const SecularData& sd, double mu,
                                              const ModeBasisL0& basis, double q_tol = 1e-6) {
  double q = detail::q_real(sd, mu);
  double scale = 1.0;
  for (const auto& t : sd.support)
    scale += std::abs(sd.alpha) * t.weight / std::max(1.0, std::abs(t.lambda - mu));
  if (std::abs(q) > q_tol * scale)
    fail(Err::not_a_secular_root, "mu does not solve the secular equation");
  double gp = 0.0;
  for (const auto& t : sd.support) {
    double d = t.lambda - mu;
    gp += t.weight / (d * d);
  }
  EigenfunctionAlpha out;
  out.mu = mu;
  out.g_prime = gp;
  double inv = 1.0 / std::sqrt(gp);
  const SecularData* sp = &sd;
  const ModeBasisL0* bp = &basis;
  out.evaluator = [sp, bp, mu, inv](double x) {
    cplx acc = 0.0;
    for (const auto& t : sp->support) {
      if (t.n == 0) {
        acc += (t.v1 * bp->eval(0, 1, x) + t.v2 * bp->eval(0, 2, x)) / (0.0 - mu);
      } else {
        acc += t.v1 * bp->eval(t.n, 1, x) / (t.lambda - mu);
      }
    }
    return inv * acc;
  };
  const CompositeRule& r = basis.rule();
  double nrm2 = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) nrm2 += r.w[j] * std::norm(out.evaluator(r.x[j]));
  out.norm_check = std::sqrt(nrm2);
  return out;
}

// ---------------------------------------------------------------------------
// Resolvent via the rank-one update of the unperturbed resolvent.
// ---------------------------------------------------------------------------

inline std::function<cplx(double)> resolvent_alpha(const ModeBasisL0& basis, const Potential& v,
                                                   double alpha,
                                                   const std::function<cplx(double)>& f,
                                                   cplx lambda,
                                                   const CompositeRule& rule = default_rule()) {
  if (alpha == 0.0) return resolvent_l0(basis, f, lambda, ResolventMethod::closed_form, 60, rule);
  if (!v.has_sampler()) fail(Err::missing_sampler, "resolvent_alpha needs pointwise potential values");
  auto r0f = resolvent_l0(basis, f, lambda, ResolventMethod::closed_form, 60, rule);
  std::function<cplx(double)> vf = v.sampler;
  auto r0v = resolvent_l0(basis, vf, lambda, ResolventMethod::closed_form, 60, rule);
  cplx num = 0.0, den = 1.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    cplx vb = std::conj(vf(rule.x[j]));
    num += rule.w[j] * r0f(rule.x[j]) * vb;
    den += alpha * rule.w[j] * r0v(rule.x[j]) * vb;
  }
  if (std::abs(den) < 1e-10) fail(Err::secular_zero, "lambda is an eigenvalue of the perturbed operator");
  cplx c = alpha * num / den;
  return [r0f, r0v, c](double x) { return r0f(x) - c * r0v(x); };
}

}  // namespace cubicspec
