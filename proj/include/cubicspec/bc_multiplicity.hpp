#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "cubicspec/solutions.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// General separated boundary conditions for the third-derivative operator:
//   cos(gamma) y(0) - i sin(gamma) y''(0) = 0
//   y'(1) = e^{i phi} y'(0)
//   cos(beta) y(1) - i sin(beta) y''(1) = 0
struct BoundaryParams {
  double gamma = 0.0;
  double beta = 0.0;
  double phi = 0.0;  // in [0, 2 pi]
};

enum class BcRegime { all_simple, double_zero_at_origin };

inline const char* bc_regime_name(BcRegime r) {
  return r == BcRegime::all_simple ? "all_simple" : "double_zero_at_origin";
}

struct MultiplicityVerdict {
  BcRegime regime = BcRegime::all_simple;
  cplx criterion_value{0.0};
};

// The degenerate regime is cut out by one complex scalar; it vanishes exactly
// when cos gamma = cos beta = 0 and phi is 0 or 2 pi, which reproduces the
// distinguished boundary conditions y''(0)=0, y'(1)=y'(0), y''(1)=0.
inline MultiplicityVerdict classify_bc(const BoundaryParams& p, double tol = 1e-10) {
  cplx rot = std::exp(iu * p.phi) - 1.0;
  cplx crit = std::cos(p.gamma) * std::cos(p.gamma) + std::cos(p.beta) * std::cos(p.beta) +
              rot * rot;
  MultiplicityVerdict out;
  out.criterion_value = crit;
  out.regime = (std::abs(crit) <= tol) ? BcRegime::double_zero_at_origin : BcRegime::all_simple;
  return out;
}

namespace detail {

inline constexpr double kCosGammaFloor = 1e-9;

// 2x2 coefficient matrix of the boundary system after eliminating one
// constant: for cos gamma != 0 the unknowns are (c2, c3), otherwise (c1, c2).
inline std::array<cplx, 4> bc_matrix(const BoundaryParams& p, cplx lambda) {
  SolutionJet j = eval_solution_jet(1.0, lambda);
  double cb = std::cos(p.beta), sb = std::sin(p.beta);
  cplx eph = std::exp(iu * p.phi);
  struct ModeView {
    cplx y, dy, d2y;
  };
  ModeView m1{j.y.y1, j.dy.y1, j.d2y.y1};
  ModeView m2{j.y.y2, j.dy.y2, j.d2y.y2};
  ModeView m3{j.y.y3, j.dy.y3, j.d2y.y3};
  auto bform = [&](const ModeView& y) { return cb * y.y - iu * sb * y.d2y; };
  if (std::abs(std::cos(p.gamma)) > kCosGammaFloor) {
    cplx tg = std::tan(p.gamma);
    return {m2.dy - eph, iu * tg * m1.dy + m3.dy,
            bform(m2), iu * tg * bform(m1) + bform(m3)};
  }
  return {m1.dy, m2.dy - eph, bform(m1), bform(m2)};
}

}  // namespace detail

// Characteristic determinant of the general boundary problem; its zeros are
// the eigenvalues.
inline cplx char_det_general(const BoundaryParams& p, cplx lambda) {
  auto m = detail::bc_matrix(p, lambda);
  return m[0] * m[3] - m[1] * m[2];
}

// Near cos(beta) tan(gamma) + sin(beta) = 0 the elimination underlying the
// matrix is numerically delicate; callers should treat verdicts there with
// suspicion instead of trusting refined digits.
inline bool det_ill_conditioned(const BoundaryParams& p) {
  double cg = std::cos(p.gamma);
  if (std::abs(cg) <= detail::kCosGammaFloor) return false;
  double tg = std::tan(p.gamma);
  return std::abs(std::cos(p.beta) * tg + std::sin(p.beta)) <= 1e-8 * (1.0 + std::abs(tg));
}

// Geometric multiplicity of an eigenvalue as dimension minus numerical rank
// of the boundary matrix.  At lambda = 0 with cos gamma = 0 the solution
// space is polynomial and the reduced system has its own matrix.
inline int multiplicity_at(const BoundaryParams& p, double lambda, double tol = 1e-6) {
  std::array<cplx, 4> m;
  if (std::abs(lambda) <= 1e-9 && std::abs(std::cos(p.gamma)) <= detail::kCosGammaFloor) {
    double cb = std::cos(p.beta);
    m = {1.0 - std::exp(iu * p.phi), 0.0, cb, cb};
  } else {
    m = detail::bc_matrix(p, cplx(lambda));
  }
  cplx det = m[0] * m[3] - m[1] * m[2];
  double frob2 = std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]);
  if (std::abs(det) > tol * (1.0 + frob2))
    fail(Err::not_a_root, "lambda is not a root of the boundary determinant");
  // Singular values of a 2x2 from the Frobenius norm and the determinant.
  double t = frob2, d = std::norm(det);
  double disc = std::sqrt(std::max(0.0, t * t - 4.0 * d));
  double smax = std::sqrt(0.5 * (t + disc));
  double smin = (smax > 0.0) ? std::sqrt(d) / smax : 0.0;
  // The cutoff keeps a unit floor: near the fully degenerate parameter point
  // the whole matrix is roundoff noise and must count as rank zero.
  double cut = tol * std::max(1.0, smax);
  int rank = (smax > cut) ? ((smin > cut) ? 2 : 1) : 0;
  return 2 - rank;
}

// Real roots of the determinant on (0, k_max^3), located as local minima of
// |det| along a uniform grid in k = cuberoot(lambda) and sharpened by ternary
// search.  Minima that fail to reach tol * scale are discarded.
inline std::vector<double> scan_det_roots(const BoundaryParams& p, double k_max, int grid = 240,
                                          double tol = 1e-8) {
  auto val = [&](double k) { return std::abs(char_det_general(p, cplx(k * k * k))); };
  auto scale = [&](double k) {
    auto m = detail::bc_matrix(p, cplx(k * k * k));
    return 1.0 + std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]);
  };
  double k_min = 1e-3;
  std::vector<double> ks(grid), vs(grid);
  for (int i = 0; i < grid; ++i) {
    ks[i] = k_min + (k_max - k_min) * i / (grid - 1.0);
    vs[i] = val(ks[i]);
  }
  std::vector<double> roots;
  for (int i = 1; i + 1 < grid; ++i) {
    if (!(vs[i] <= vs[i - 1] && vs[i] <= vs[i + 1])) continue;
    double a = ks[i - 1], b = ks[i + 1];
    for (int it = 0; it < 90; ++it) {
      double u = a + (b - a) / 3.0, w = b - (b - a) / 3.0;
      if (val(u) <= val(w))
        b = w;
      else
        a = u;
    }
    double k = 0.5 * (a + b);
    if (val(k) <= tol * scale(k)) {
      double lam = k * k * k;
      if (roots.empty() || std::abs(lam - roots.back()) > 1e-6 * (1.0 + std::abs(lam)))
        roots.push_back(lam);
    }
  }
  return roots;
}

}  // namespace cubicspec
