#pragma once

#include <cmath>
#include <vector>

#include "cubicspec/types.hpp"

namespace cubicspec {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the Legendre
// recurrence.  Symmetric pairs are mirrored.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Composite rule on [0,1]: `panels` equal panels of a fixed-order rule.
struct CompositeRule {
  int panels = 0;
  int order = 0;
  std::vector<double> x;       // all nodes, ascending
  std::vector<double> w;       // matching weights
  std::vector<double> ref_x;   // single-panel nodes on [-1,1]
  std::vector<double> ref_w;

  std::size_t size() const { return x.size(); }
};

inline CompositeRule make_rule(int panels = 64, int order = 8) {
  CompositeRule r;
  r.panels = panels;
  r.order = order;
  gauss_legendre(order, r.ref_x, r.ref_w);
  r.x.reserve(static_cast<std::size_t>(panels) * order);
  r.w.reserve(static_cast<std::size_t>(panels) * order);
  double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    double a = p * h;
    for (int j = 0; j < order; ++j) {
      r.x.push_back(a + 0.5 * h * (r.ref_x[j] + 1.0));
      r.w.push_back(0.5 * h * r.ref_w[j]);
    }
  }
  return r;
}

inline const CompositeRule& default_rule() {
  static const CompositeRule r = make_rule();
  return r;
}

inline const CompositeRule& coarse_rule() {
  static const CompositeRule r = make_rule(32, 8);
  return r;
}

template <class F>
cplx integrate(const CompositeRule& r, F&& f) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) acc += r.w[j] * f(r.x[j]);
  return acc;
}

// L2 inner product <f, g> = integral of f * conj(g).
template <class F, class G>
cplx inner(const CompositeRule& r, F&& f, G&& g) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j)
    acc += r.w[j] * f(r.x[j]) * std::conj(g(r.x[j]));
  return acc;
}

// Partial-panel integration matrix: S[m][j] = integral over [-1, xi_m] of the
// j-th Lagrange basis polynomial on the panel's own nodes.  Lets cumulative
// integrals stop exactly at a node using only that panel's samples.
inline std::vector<std::vector<double>> partial_integration_matrix(
    const std::vector<double>& xi) {
  int n = static_cast<int>(xi.size());
  // Integrate each Lagrange basis with a fine auxiliary rule (exact for the
  // polynomial degree involved).
  std::vector<double> ax, aw;
  gauss_legendre(n + 2, ax, aw);
  auto lagrange = [&](int j, double t) {
    double v = 1.0;
    for (int q = 0; q < n; ++q)
      if (q != j) v *= (t - xi[q]) / (xi[j] - xi[q]);
    return v;
  };
  std::vector<std::vector<double>> S(n, std::vector<double>(n, 0.0));
  for (int m = 0; m < n; ++m) {
    double a = -1.0, b = xi[m];
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int q = 0; q < n + 2; ++q) {
        double t = a + 0.5 * (b - a) * (ax[q] + 1.0);
        acc += 0.5 * (b - a) * aw[q] * lagrange(j, t);
      }
      S[m][j] = acc;
    }
  }
  return S;
}

}  // namespace cubicspec
