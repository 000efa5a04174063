#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgdlab/matrix.hpp"

namespace oracles {

/// Cyclic two-sided Jacobi eigenvalue iteration for a symmetric matrix.
/// Returns eigenvalues in descending order.
inline std::vector<double> symmetric_eigenvalues(sgdlab::Matrix a) {
  const std::size_t n = a.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-28) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

/// Largest singular value via power iteration on A^T A.
inline double operator_norm_power_iteration(const sgdlab::Matrix& a, int iters = 2000) {
  std::vector<double> v(a.cols, 1.0 / std::sqrt(static_cast<double>(a.cols)));
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> av(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j) av[i] += a(i, j) * v[j];
    std::vector<double> atav(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = 0; j < a.cols; ++j) atav[j] += a(i, j) * av[i];
    const double nrm = sgdlab::norm2(atav);
    if (nrm == 0.0) return 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) v[j] = atav[j] / nrm;
    sigma = std::sqrt(nrm);
  }
  return sigma;
}

/// Numerical rank by Gaussian elimination with partial pivoting.
inline int elimination_rank(sgdlab::Matrix a, double tol) {
  const std::size_t m = a.rows, n = a.cols;
  double max_entry = 0.0;
  for (double v : a.data) max_entry = std::max(max_entry, std::abs(v));
  if (max_entry == 0.0) return 0;
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t piv = row;
    for (std::size_t i = row + 1; i < m; ++i)
      if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
    if (std::abs(a(piv, col)) <= tol * max_entry) continue;
    if (piv != row)
      for (std::size_t j = 0; j < n; ++j) std::swap(a(row, j), a(piv, j));
    for (std::size_t i = row + 1; i < m; ++i) {
      const double f = a(i, col) / a(row, col);
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(row, j);
    }
    ++row;
    ++rank;
  }
  return rank;
}

/// Central finite differences of a scalar function of theta.
template <typename F>
inline std::vector<double> finite_difference_gradient(F&& f, std::vector<double> theta,
                                                      double step = 1e-5) {
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double orig = theta[k];
    theta[k] = orig + step;
    const double fp = f(theta);
    theta[k] = orig - step;
    const double fm = f(theta);
    theta[k] = orig;
    g[k] = (fp - fm) / (2.0 * step);
  }
  return g;
}

}  // namespace oracles
