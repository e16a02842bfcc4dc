#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cubicspec/perturbation.hpp"
#include "cubicspec/potential.hpp"
#include "cubicspec/quadrature.hpp"
#include "cubicspec/spectrum_l0.hpp"
#include "cubicspec/transforms.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// ---------------------------------------------------------------------------
// Forward direction: leading Taylor coefficients of the characteristic
// function at the origin, from moments of the potential.
// ---------------------------------------------------------------------------

struct BCoefficients {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double err = 0.0;
};

namespace detail {

inline constexpr std::array<double, 13> factorial = {
    1.0,      1.0,       2.0,        6.0,         24.0,        120.0,     720.0,
    5040.0,   40320.0,   362880.0,   3628800.0,   39916800.0,  479001600.0};

inline std::array<double, 3> b_forward_on_rule(const Potential& v, double alpha,
                                               const CompositeRule& r) {
  // Simple moments M_m = int x^m v and R_m = int (1-u)^m v(u) for m = 0,3,6,9.
  std::array<cplx, 4> M{}, R{};
  for (std::size_t i = 0; i < r.size(); ++i) {
    double x = r.x[i];
    cplx vw = r.w[i] * v(x);
    double xm = 1.0, um = 1.0;
    for (int p = 0; p < 4; ++p) {
      M[p] += xm * vw;
      R[p] += um * vw;
      xm *= x * x * x;
      double u = 1.0 - x;
      um *= u * u * u;
    }
  }
  // Triangle moments T_m = iint_{t<x} (x-t)^m v(t) conj(v(x)) for m = 2,5,8,
  // via running integrals P_r(x) = int_0^x t^r v(t) dt and the binomial
  // expansion of (x-t)^m.
  const auto S = partial_integration_matrix(r.ref_x);
  const int ord = r.order;
  const double hh = 0.5 / r.panels;
  std::array<cplx, 9> carry{};
  std::array<cplx, 3> T{};
  std::vector<std::array<cplx, 9>> g(ord);
  for (int p = 0; p < r.panels; ++p) {
    for (int j = 0; j < ord; ++j) {
      double t = r.x[static_cast<std::size_t>(p) * ord + j];
      cplx vt = v(t);
      double tp = 1.0;
      for (int q = 0; q < 9; ++q) {
        g[j][q] = tp * vt;
        tp *= t;
      }
    }
    for (int m = 0; m < ord; ++m) {
      std::size_t idx = static_cast<std::size_t>(p) * ord + m;
      double x = r.x[idx];
      std::array<cplx, 9> pref = carry;
      for (int j = 0; j < ord; ++j)
        for (int q = 0; q < 9; ++q) pref[q] += hh * S[m][j] * g[j][q];
      cplx vb = r.w[idx] * std::conj(v(x));
      for (int q = 0; q < 3; ++q) {
        int mm = 3 * q + 2;
        cplx inner = 0.0;
        double binom = 1.0, sign = 1.0;
        double xp = std::pow(x, mm);
        for (int rr = 0; rr <= mm; ++rr) {
          inner += binom * sign * xp * pref[rr];
          binom *= double(mm - rr) / double(rr + 1);
          sign = -sign;
          if (x != 0.0) xp /= x;
        }
        T[q] += vb * inner;
      }
    }
    for (int j = 0; j < ord; ++j)
      for (int q = 0; q < 9; ++q) carry[q] += hh * r.ref_w[j] * g[j][q];
  }
  // a_j collects the lambda^j coefficient of S1(lambda) N1(-lambda)
  // + i lambda y2(1) m(lambda); only its imaginary part feeds b_j.
  const std::array<cplx, 4> ipow3 = {1.0, -iu, -1.0, iu};  // i^{3j}
  std::array<cplx, 4> a{};
  for (int j = 1; j <= 3; ++j) {
    cplx s1 = 0.0;
    for (int p = 0; p <= j; ++p) {
      int q = j - p;
      s1 += std::conj(M[p]) * R[q] / (factorial[3 * p] * factorial[3 * q]);
    }
    cplx s2 = 0.0;
    for (int p = 0; p <= j - 1; ++p) {
      int q = j - 1 - p;
      s2 += T[q] / (factorial[3 * p + 1] * factorial[3 * q + 2]);
    }
    a[j] = ipow3[j] * (s1 - s2);
  }
  return {-2.0 * alpha * a[1].imag(), -1.0 / 12.0 - 2.0 * alpha * a[2].imag(),
          -2.0 * alpha * a[3].imag()};
}

}  // namespace detail

inline BCoefficients b_forward(const Potential& v, double alpha,
                               const CompositeRule& rule = default_rule()) {
  if (!v.has_sampler()) fail(Err::missing_sampler, "b_forward needs pointwise potential values");
  auto fine = detail::b_forward_on_rule(v, alpha, rule);
  auto half = detail::b_forward_on_rule(v, alpha, detail::half_rule(rule));
  BCoefficients out;
  out.b1 = fine[0];
  out.b2 = fine[1];
  out.b3 = fine[2];
  out.err = std::max({std::abs(fine[0] - half[0]), std::abs(fine[1] - half[1]),
                      std::abs(fine[2] - half[2])});
  return out;
}

// ---------------------------------------------------------------------------
// Spectral direction: the characteristic ratio Q is rational with zeros at
// the new eigenvalues and poles at the removed ones.  Everything downstream
// reads off that model.
// ---------------------------------------------------------------------------

namespace detail {

struct RationalModel {
  int r = 0, s = 0;  // order of the zero/pole of Q at the origin
  int zero_mult = 2;
  double alpha = 0.0;  // sign only steers the pole/zero pairing
  std::vector<double> zeros;  // new eigenvalues away from 0, ascending
  std::vector<double> poles;  // removed eigenvalues away from 0, ascending
  std::vector<int> pole_n;    // mode index per pole, same order

  bool pair_from_top() const {
    if (alpha != 0.0) return alpha > 0.0;
    if (zeros.empty()) return true;
    if (poles.empty()) return true;
    return zeros.back() > poles.back();
  }
};

inline double match_tol_at(double tol, double lambda) {
  return (tol > 0.0) ? tol : 1e-8 * (1.0 + std::abs(lambda));
}

inline RationalModel extract_model(const SpectrumL0& s0, const PerturbedSpectrum& sa,
                                   double match_tol) {
  RationalModel md;
  md.alpha = sa.alpha;
  const PerturbedEntry* zero = nullptr;
  std::vector<double> survivors;
  for (const auto& e : sa.entries) {
    switch (e.cls) {
      case EigClass::zero_special:
        if (zero) fail(Err::case_mismatch, "two zero-class entries in the perturbed spectrum");
        zero = &e;
        break;
      case EigClass::sigma0_simple:
        survivors.push_back(e.lambda);
        break;
      case EigClass::double_coincidence:
        survivors.push_back(e.lambda);
        md.zeros.push_back(e.lambda);
        break;
      case EigClass::sigma2_simple:
        md.zeros.push_back(e.lambda);
        break;
    }
  }
  if (!zero) fail(Err::case_mismatch, "perturbed spectrum lacks the distinguished entry at zero");
  md.zero_mult = zero->mult;
  switch (zero->mult) {
    case 1: md.s = 1; md.r = 0; break;
    case 2: md.s = 0; md.r = 0; break;
    case 3: md.s = 0; md.r = 1; break;
    default: fail(Err::case_mismatch, "zero entry multiplicity outside 1..3");
  }
  for (const auto& e : s0.entries) {
    if (e.n == 0) continue;
    bool survived = false;
    for (double s : survivors) {
      if (std::abs(s - e.lambda) <= match_tol_at(match_tol, e.lambda)) {
        survived = true;
        break;
      }
    }
    if (!survived) {
      md.poles.push_back(e.lambda);
      md.pole_n.push_back(e.n);
    }
  }
  std::sort(md.zeros.begin(), md.zeros.end());
  // poles arrive sorted because the base spectrum is sorted; keep pole_n glued
  std::vector<std::size_t> order(md.poles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return md.poles[a] < md.poles[b]; });
  std::vector<double> ps(md.poles.size());
  std::vector<int> pn(md.poles.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    ps[i] = md.poles[order[i]];
    pn[i] = md.pole_n[order[i]];
  }
  md.poles = std::move(ps);
  md.pole_n = std::move(pn);
  int balance = md.r - md.s + static_cast<int>(md.zeros.size()) - static_cast<int>(md.poles.size());
  if (balance != 0)
    fail(Err::case_mismatch, "pole and zero counts do not balance the multiplicity at zero");
  return md;
}

// Pairs each zero with a nearby pole so products stay O(1).  New eigenvalues
// sit just above their pole for alpha > 0 and just below for alpha < 0, so the
// lists align from that end; the |Z - P| leftovers live at the other end.
struct Pairing {
  std::vector<std::pair<double, double>> pairs;  // (zero, pole)
  std::vector<double> extra_zeros;
  std::vector<double> extra_poles;
};

inline Pairing pair_lists(const std::vector<double>& zeros, const std::vector<double>& poles,
                          bool from_top) {
  Pairing out;
  std::size_t Z = zeros.size(), P = poles.size(), n = std::min(Z, P);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t zi = from_top ? Z - 1 - i : i;
    std::size_t pi = from_top ? P - 1 - i : i;
    out.pairs.push_back({zeros[zi], poles[pi]});
  }
  for (std::size_t i = n; i < Z; ++i) out.extra_zeros.push_back(zeros[from_top ? Z - 1 - i : i]);
  for (std::size_t i = n; i < P; ++i) out.extra_poles.push_back(poles[from_top ? P - 1 - i : i]);
  return out;
}

struct LadderResult {
  double c = 0.0;
  double err = 0.0;
};

// 1/C as the limit of (iy)^(r-s) prod(1 - iy/mu) / prod(1 - iy/p) up the
// imaginary axis, accelerated by two Richardson levels over y ratios of 10.
// Each leftover zero absorbs one power of 1/(iy), each leftover pole one
// power of iy, so every partial product stays bounded.
inline LadderResult ladder_c(const RationalModel& md) {
  Pairing pr = pair_lists(md.zeros, md.poles, md.pair_from_top());
  auto eval = [&](double y) -> cplx {
    cplx z{0.0, y};
    cplx acc = 1.0;
    for (const auto& [mu, p] : pr.pairs) acc *= (1.0 - z / mu) / (1.0 - z / p);
    for (double mu : pr.extra_zeros) acc *= (1.0 - z / mu) / z;
    for (double p : pr.extra_poles) acc *= z / (1.0 - z / p);
    int spare = (md.r - md.s) + static_cast<int>(pr.extra_zeros.size()) -
                static_cast<int>(pr.extra_poles.size());
    for (; spare > 0; --spare) acc *= z;
    for (; spare < 0; ++spare) acc /= z;
    return acc;
  };
  double base = std::pow(2.0 * pi, 3);
  std::array<cplx, 4> E;
  for (int j = 0; j < 4; ++j) E[j] = eval(base * std::pow(10.0, 3 + j));
  std::array<cplx, 3> L1;
  for (int j = 0; j < 3; ++j) L1[j] = (10.0 * E[j + 1] - E[j]) / 9.0;
  std::array<cplx, 2> L2;
  for (int j = 0; j < 2; ++j) L2[j] = (100.0 * L1[j + 1] - L1[j]) / 99.0;
  cplx inv = L2[1];
  double spread = std::abs(L2[1] - L2[0]) + std::abs(inv.imag());
  if (std::abs(inv.real()) <= 10.0 * spread || inv.real() == 0.0)
    fail(Err::non_convergent, "scaling-constant ladder did not settle");
  LadderResult out;
  out.c = 1.0 / inv.real();
  out.err = std::abs(out.c) * spread / std::abs(inv.real());
  if (out.err > 0.1 * std::abs(out.c))
    fail(Err::non_convergent, "scaling-constant ladder spread above 10 percent");
  return out;
}

// Residue of the rational model at the pole p_k:
//   alpha |v_k|^2 = C p_k^{r+1-s} prod(1 - p_k/mu) / prod_{q != k}(1 - p_k/q).
inline double residue_at(const RationalModel& md, std::size_t k, double c) {
  std::vector<double> other;
  other.reserve(md.poles.size() - 1);
  for (std::size_t i = 0; i < md.poles.size(); ++i)
    if (i != k) other.push_back(md.poles[i]);
  Pairing pr = pair_lists(md.zeros, other, md.pair_from_top());
  double pk = md.poles[k];
  double acc = c;
  for (const auto& [mu, p] : pr.pairs) acc *= (1.0 - pk / mu) / (1.0 - pk / p);
  int spare = md.r + 1 - md.s;
  for (double mu : pr.extra_zeros) {
    if (spare > 0) {
      acc *= pk - pk * pk / mu;  // p^1 (1 - p/mu) fused
      --spare;
    } else {
      acc *= 1.0 - pk / mu;
    }
  }
  for (double p : pr.extra_poles) {
    acc /= 1.0 - pk / p;
    if (spare < 0) {
      acc /= pk;
      ++spare;
    }
  }
  for (; spare > 0; --spare) acc *= pk;
  for (; spare < 0; ++spare) acc /= pk;
  return acc;
}

}  // namespace detail

struct LeadingCoefficient {
  int order = 2;   // subscript of the first nonvanishing Taylor coefficient
  double b = 0.0;
  double c = 0.0;  // scaling constant of the rational model, b = -c/12
  double err = 0.0;
};

inline LeadingCoefficient b_from_spectra(const SpectrumL0& s0, const PerturbedSpectrum& sa,
                                         double match_tol = -1.0) {
  detail::RationalModel md = detail::extract_model(s0, sa, match_tol);
  detail::LadderResult lc = detail::ladder_c(md);
  LeadingCoefficient out;
  out.order = (md.s == 1) ? 1 : (md.r == 1 ? 3 : 2);
  out.c = lc.c;
  out.b = -lc.c / 12.0;
  out.err = lc.err / 12.0;
  return out;
}

// ---------------------------------------------------------------------------
// Weight recovery: residues of the rational model at the removed eigenvalues.
// ---------------------------------------------------------------------------

struct RecoveredData {
  int order = 2;
  double c = 0.0;
  double b = 0.0;
  double alpha_hat = 0.0;            // alpha * ||v||^2, signed
  std::map<int, double> alpha_w;     // alpha |v_n|^2 per removed index
  double alpha_w_zero = 0.0;         // alpha (|v01|^2 + |v02|^2) when 0 is removed
  std::map<int, double> weights;     // normalized |v_n|^2 / ||v||^2
  double zero_weight = 0.0;
  double err = 0.0;
};

inline RecoveredData recover_weights(const SpectrumL0& s0, const PerturbedSpectrum& sa,
                                     double match_tol = -1.0) {
  detail::RationalModel md = detail::extract_model(s0, sa, match_tol);
  RecoveredData out;
  out.order = (md.s == 1) ? 1 : (md.r == 1 ? 3 : 2);
  if (md.poles.empty() && md.s == 0) {
    // Nothing was removed: the potential is orthogonal to every mode, so in
    // the resolved subspace it is zero.
    out.c = detail::ladder_c(md).c;
    out.b = -out.c / 12.0;
    return out;
  }
  detail::LadderResult lc = detail::ladder_c(md);
  out.c = lc.c;
  out.b = -lc.c / 12.0;
  out.err = lc.err;
  for (std::size_t k = 0; k < md.poles.size(); ++k)
    out.alpha_w[md.pole_n[k]] = detail::residue_at(md, k, lc.c);
  if (md.s == 1) out.alpha_w_zero = -lc.c;
  // All alpha-weights carry the sign of alpha; a mixed bag means the spectra
  // were not produced by a rank-one perturbation of this form.
  double pos = 0.0, neg = 0.0;
  for (const auto& [n, aw] : out.alpha_w) {
    pos = std::max(pos, aw);
    neg = std::min(neg, aw);
  }
  pos = std::max(pos, out.alpha_w_zero);
  neg = std::min(neg, out.alpha_w_zero);
  double scale = std::max(pos, -neg);
  if (pos > 0.0 && neg < 0.0 && std::min(pos, -neg) > 1e-10 * scale)
    fail(Err::sign_error, "recovered alpha-weights carry mixed signs");
  double total = out.alpha_w_zero;
  for (const auto& [n, aw] : out.alpha_w) total += aw;
  out.alpha_hat = total;
  if (total != 0.0) {
    for (const auto& [n, aw] : out.alpha_w) out.weights[n] = aw / total;
    out.zero_weight = out.alpha_w_zero / total;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full reconstruction from a bundle of spectra: the base problem, the
// potential itself, and two probe-shifted copies to expose the phases.
// ---------------------------------------------------------------------------

struct SpectraBundle {
  SpectrumL0 s0;
  PerturbedSpectrum sv;    // potential v
  PerturbedSpectrum svg;   // potential v + g
  PerturbedSpectrum svig;  // potential v + i g
  Potential probe;         // g, coefficient form
};

inline Potential combine_potentials(const Potential& a, const Potential& b, cplx fb) {
  Potential out;
  out.v01 = a.v01 + fb * b.v01;
  out.v02 = a.v02 + fb * b.v02;
  out.coeff = a.coeff;
  for (const auto& [n, c] : b.coeff) out.coeff[n] += fb * c;
  out.cutoff = std::max(a.cutoff, b.cutoff);
  if (a.has_sampler() && b.has_sampler()) {
    auto fa = a.sampler, fbs = b.sampler;
    out.sampler = [fa, fbs, fb](double x) { return fa(x) + fb * fbs(x); };
  }
  return out;
}

inline SpectraBundle make_bundle(const Potential& v, double alpha, int n_max,
                                 const Potential& probe, const ModeBasisL0* basis = nullptr) {
  SpectraBundle out;
  ModeBasisL0 local_basis{(basis && basis->n_max() >= n_max) ? basis->spectrum() : eigs_l0(n_max)};
  const ModeBasisL0* bp = basis && basis->n_max() >= n_max ? basis : &local_basis;
  out.s0 = bp->spectrum();
  // Keep the unperturbed listing on the same window as the perturbed ones.
  std::erase_if(out.s0.entries, [n_max](const L0Entry& e) { return std::abs(e.n) > n_max; });
  Potential vc = (v.has_coefficients() || !v.has_sampler()) ? v : coefficients_of(v.sampler, *bp);
  Potential gc = (probe.has_coefficients() || !probe.has_sampler())
                     ? probe
                     : coefficients_of(probe.sampler, *bp);
  out.probe = gc;
  out.sv = spectrum_alpha(vc, alpha, n_max, -1.0, bp);
  out.svg = spectrum_alpha(combine_potentials(vc, gc, 1.0), alpha, n_max, -1.0, bp);
  out.svig = spectrum_alpha(combine_potentials(vc, gc, iu), alpha, n_max, -1.0, bp);
  return out;
}

struct Reconstruction {
  Potential v_hat;  // coefficient form
  double alpha_hat = 0.0;
  double err = 0.0;
  std::string zero_gauge_note;
};

inline Reconstruction reconstruct_v(const SpectraBundle& bundle, double g_floor = 1e-6,
                                    double modulus_tol = 1e-3) {
  RecoveredData rv = recover_weights(bundle.s0, bundle.sv);
  RecoveredData rvg = recover_weights(bundle.s0, bundle.svg);
  RecoveredData rvig = recover_weights(bundle.s0, bundle.svig);
  Reconstruction out;
  out.err = std::max({rv.err, rvg.err, rvig.err});
  if (rv.alpha_hat == 0.0 && rv.alpha_w.empty() && rv.alpha_w_zero == 0.0) {
    out.zero_gauge_note = "no eigenvalue moved; the potential vanishes in the resolved subspace";
    return out;
  }
  double alpha = rv.alpha_hat;  // equals alpha for a normalized potential
  out.alpha_hat = alpha;
  std::set<int> support;
  for (const auto& [n, aw] : rv.alpha_w) support.insert(n);
  for (const auto& [n, aw] : rvg.alpha_w) support.insert(n);
  for (const auto& [n, aw] : rvig.alpha_w) support.insert(n);
  auto aw_of = [](const RecoveredData& rd, int n) {
    auto it = rd.alpha_w.find(n);
    return it == rd.alpha_w.end() ? 0.0 : it->second;
  };
  for (int n : support) {
    cplx gn = 0.0;
    if (auto it = bundle.probe.coeff.find(n); it != bundle.probe.coeff.end()) gn = it->second;
    double awv = aw_of(rv, n);
    if (std::abs(gn) < g_floor) {
      // The probe is blind at this index, so the phase of v_n is invisible.
      fail(Err::g_floor_violation, "probe coefficient below floor inside the recovered support");
    }
    double awg = aw_of(rvg, n);
    double awig = aw_of(rvig, n);
    double awgn = alpha * std::norm(gn);
    double re = (awg - awv - awgn) / (2.0 * alpha);
    double im = (awig - awv - awgn) / (2.0 * alpha);
    cplx vg{re, im};  // v_n conj(g_n)
    cplx vn = vg * gn / std::norm(gn);
    double direct = awv / alpha;
    double cross = std::norm(vg) / std::norm(gn);
    if (std::abs(direct - cross) > modulus_tol * (direct + cross + 1e-6))
      fail(Err::inconsistent_modulus, "cross-term modulus disagrees with the direct weight");
    if (std::abs(vn) > 0.0) out.v_hat.coeff[n] = vn;
    out.v_hat.cutoff = std::max(out.v_hat.cutoff, std::abs(n));
  }
  // Zero modes: only the inner product with the probe's zero component is
  // observable, so take the minimum-norm representative along the probe.
  double aw0v = rv.alpha_w_zero;
  if (aw0v == 0.0) {
    out.v_hat.v01 = out.v_hat.v02 = 0.0;
  } else {
    cplx g01 = bundle.probe.v01, g02 = bundle.probe.v02;
    double g0n2 = std::norm(g01) + std::norm(g02);
    if (std::sqrt(g0n2) < g_floor)
      fail(Err::g_floor_violation, "probe has no zero-mode component but the potential does");
    double aw0gn = alpha * g0n2;
    double re = (rvg.alpha_w_zero - aw0v - aw0gn) / (2.0 * alpha);
    double im = (rvig.alpha_w_zero - aw0v - aw0gn) / (2.0 * alpha);
    cplx c0{re, im};  // <v_0, g_0> over the two zero branches
    out.v_hat.v01 = c0 * g01 / g0n2;
    out.v_hat.v02 = c0 * g02 / g0n2;
    out.zero_gauge_note =
        "zero modes set to the minimum-norm representative along the probe direction";
    double direct = aw0v / alpha;
    double projected = std::norm(c0) / g0n2;
    if (projected > direct * (1.0 + modulus_tol) + 1e-9)
      fail(Err::inconsistent_modulus, "zero-mode projection exceeds the recovered weight");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rigidity check: a perturbed spectrum equal to the unperturbed one forces
// every recovered weight to vanish.
// ---------------------------------------------------------------------------

struct AmbarzumyanResult {
  bool aligned = false;
  double max_alpha_weight = 0.0;
  bool v_zero = false;
};

inline AmbarzumyanResult ambarzumyan_check(const SpectrumL0& s0, const PerturbedSpectrum& sa,
                                           double tol = 1e-6) {
  AmbarzumyanResult out;
  out.aligned = true;
  std::size_t matched = 0;
  for (const auto& e : s0.entries) {
    bool found = false;
    for (const auto& pe : sa.entries) {
      if (std::abs(pe.lambda - e.lambda) <= sa.tol_at(e.lambda) && pe.mult == e.mult) {
        found = true;
        break;
      }
    }
    if (!found) {
      out.aligned = false;
      break;
    }
    ++matched;
  }
  if (matched != sa.entries.size()) out.aligned = false;
  try {
    RecoveredData rd = recover_weights(s0, sa);
    for (const auto& [n, aw] : rd.alpha_w)
      out.max_alpha_weight = std::max(out.max_alpha_weight, std::abs(aw));
    out.max_alpha_weight = std::max(out.max_alpha_weight, std::abs(rd.alpha_w_zero));
  } catch (const Failure&) {
    out.max_alpha_weight = std::numeric_limits<double>::infinity();
  }
  out.v_zero = out.aligned && out.max_alpha_weight <= tol;
  return out;
}

}  // namespace cubicspec
