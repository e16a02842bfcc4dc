#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#ifndef LAPACK_COMPLEX_CPP
#define LAPACK_COMPLEX_CPP
#endif
#include <lapacke.h>

#include "cubicspec/potential.hpp"
#include "cubicspec/types.hpp"

namespace cubicspec {

// Dense discretization of i y''' + alpha <y, v> v on a uniform grid, with the
// three boundary conditions kept as separate functionals.  Serves as an
// independent numerical cross-check for the secular-equation spectra.
struct DiscreteOperator {
  int grid_size = 0;
  double h = 0.0;
  Eigen::MatrixXcd matrix;       // differential part plus rank-one coupling
  Eigen::MatrixXcd constraints;  // 3 x M rows: y''(0), y'(1)-y'(0), y''(1)
  std::array<int, 3> bc_rows{};  // grid node anchoring each constraint
};

namespace detail {

// Classic recursive finite-difference weights (Fornberg): weights at the
// nodes x for the m-th derivative evaluated at z.
inline std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

}  // namespace detail

inline DiscreteOperator discretize(const Potential& v, double alpha, int M) {
  if (M < 64) fail(Err::grid_too_coarse, "need at least 64 grid points");
  if (alpha != 0.0 && !v.has_sampler())
    fail(Err::missing_sampler, "discretize needs pointwise potential values");
  DiscreteOperator op;
  op.grid_size = M;
  double h = 1.0 / (M - 1);
  op.h = h;
  op.matrix = Eigen::MatrixXcd::Zero(M, M);

  // Third derivative: six-point forward-biased stencil inside.  The unique
  // centered five-point stencil has a parasitic root exactly on the unit
  // circle (z = -1), which turns into global mesh-sawtooth modes and a
  // spurious near-zero eigenvalue pair that grows with M.  The biased stencil
  // factors as (z-1)^3 (z^2 - 4z - 1) with parasitic roots 2 +- sqrt(5), so
  // parasitic solutions are boundary layers and their eigenvalues land at
  // |lambda| ~ 1/h^3, far outside the window this oracle reports.
  double s = 1.0 / (h * h * h);
  for (int r = 2; r <= M - 4; ++r) {
    op.matrix(r, r - 2) = -0.25 * s;
    op.matrix(r, r - 1) = -0.25 * s;
    op.matrix(r, r) = 2.5 * s;
    op.matrix(r, r + 1) = -3.5 * s;
    op.matrix(r, r + 2) = 1.75 * s;
    op.matrix(r, r + 3) = -0.25 * s;
  }
  for (int r : {0, 1, M - 3, M - 2, M - 1}) {
    int lo = std::max(0, std::min(r - 3, M - 7));
    std::vector<double> nodes(7);
    for (int j = 0; j < 7; ++j) nodes[j] = (lo + j) * h;
    auto w = detail::fd_weights(r * h, nodes, 3);
    for (int j = 0; j < 7; ++j) op.matrix(r, lo + j) = w[j];
  }
  op.matrix *= iu;

  if (alpha != 0.0) {
    std::vector<cplx> vals(M);
    for (int i = 0; i < M; ++i) vals[i] = v(i * h);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        double wq = (j == 0 || j == M - 1) ? 0.5 * h : h;
        op.matrix(i, j) += alpha * vals[i] * std::conj(vals[j]) * wq;
      }
    }
  }

  op.constraints = Eigen::MatrixXcd::Zero(3, M);
  std::vector<double> head(6), tail(6);
  for (int j = 0; j < 6; ++j) {
    head[j] = j * h;
    tail[j] = (M - 6 + j) * h;
  }
  auto d2_0 = detail::fd_weights(0.0, head, 2);
  auto d1_0 = detail::fd_weights(0.0, head, 1);
  auto d1_1 = detail::fd_weights(1.0, tail, 1);
  auto d2_1 = detail::fd_weights(1.0, tail, 2);
  for (int j = 0; j < 6; ++j) {
    op.constraints(0, j) = d2_0[j];
    op.constraints(1, j) -= d1_0[j];
    op.constraints(1, M - 6 + j) += d1_1[j];
    op.constraints(2, M - 6 + j) = d2_1[j];
  }
  op.bc_rows = {0, M - 1, M - 1};
  return op;
}

// Eigenvalues of the operator compressed onto the constraint null space:
// the `count` smallest-magnitude ones, sorted ascending.  The discretized
// problem is only approximately normal, so a general eigensolver is used.
inline std::vector<double> oracle_eigs(const DiscreteOperator& op, int count) {
  int M = op.grid_size;
  if (count > M / 8) fail(Err::grid_too_coarse, "requested more modes than the grid resolves");
  // Orthonormal basis of the null space of the constraints via a QR factor
  // of their adjoint: trailing columns of Q.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(op.constraints.adjoint());
  Eigen::MatrixXcd c = op.matrix;
  c.applyOnTheLeft(qr.householderQ().adjoint());
  c.applyOnTheRight(qr.householderQ());
  int n = M - static_cast<int>(op.constraints.rows());
  Eigen::MatrixXcd p = c.bottomRightCorner(n, n);
  std::vector<cplx> w(static_cast<std::size_t>(n));
  int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n,
                           reinterpret_cast<lapack_complex_double*>(p.data()), n,
                           reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1,
                           nullptr, 1);
  if (info != 0) fail(Err::eigensolve_failure, "dense eigensolver did not converge");
  std::sort(w.begin(), w.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  if (count < n) w.resize(static_cast<std::size_t>(count));
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i].real();
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cubicspec
