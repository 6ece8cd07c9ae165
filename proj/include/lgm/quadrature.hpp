#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lgm {

/// Closed interval [lo, hi]; empty when lo > hi.
struct Interval {
  double lo = 0.0;
  double hi = -1.0;

  bool empty() const { return lo > hi; }
  double length() const { return empty() ? 0.0 : hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  explicit GaussLegendre(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      const double b = i / std::sqrt(4.0 * i * i - 1.0);
      jacobi(i, i - 1) = b;
      jacobi(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    nodes = solver.eigenvalues();
    weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

/// Shared 24-point rule.
const GaussLegendre& gauss_legendre_24();

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
/// The interval is pre-split into `initial` panels so that narrow features are not skipped.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int initial = 8, int max_depth = 40) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / initial;
  double total = 0.0;
  double fa = f(a);
  for (int i = 0; i < initial; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == initial) ? b : a + (i + 1) * h;
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    const double fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += detail::simpson_step(f, lo, hi, fa, fm, fb, whole, tol / initial, max_depth);
    fa = fb;
  }
  return total;
}

/// Integrates f over [a, b] split at the sorted `breaks` that fall strictly inside, using
/// Gauss-Legendre on every piece of length at most `max_piece`.
template <class F>
double piecewise_gauss(F&& f, double a, double b, std::span<const double> breaks, double max_piece,
                       const GaussLegendre& rule = gauss_legendre_24()) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts;
  pts.reserve(breaks.size() + 2);
  pts.push_back(a);
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i];
    const double hi = pts[i + 1];
    if (hi - lo <= 0.0) continue;
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_piece)));
    const double h = (hi - lo) / pieces;
    for (int p = 0; p < pieces; ++p) total += rule.integrate(f, lo + p * h, p + 1 == pieces ? hi : lo + (p + 1) * h);
  }
  return total;
}

}  // namespace lgm
