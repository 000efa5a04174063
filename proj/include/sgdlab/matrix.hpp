#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdlab/rng.hpp"

namespace sgdlab {

/// Dense row-major matrix of 64-bit floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> entries)
      : rows(r), cols(c), data(std::move(entries)) {
    if (data.size() != rows * cols)
      throw std::invalid_argument("Matrix: entry count does not match shape");
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows);
    for (std::size_t i = 0; i < rows; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double v) { return std::isfinite(v); });
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix gaussian(std::size_t r, std::size_t c, RngStream& rng) {
    Matrix m(r, c);
    for (auto& v : m.data) v = rng.gaussian();
    return m;
  }
};

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite())
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Full decomposition A = U diag(sigma) V^T with sigma descending.
struct SvdResult {
  Matrix u;                   // rows x k
  std::vector<double> sigma;  // k = min(rows, cols), descending
  Matrix v;                   // cols x k
};

namespace detail {

// One-sided Jacobi on an m x n matrix with m >= n: rotates column pairs of
// the working copy until all pairs are numerically orthogonal. Singular
// values are the final column norms; V accumulates the rotations.
inline SvdResult jacobi_svd_tall(const Matrix& a) {
  const std::size_t m = a.rows, n = a.cols;
  // Column-major working buffers.
  std::vector<std::vector<double>> b(n, std::vector<double>(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) b[j][i] = a(i, j);
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  const double tol = 1e-15;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        const double* bp = b[p].data();
        const double* bq = b[q].data();
        for (std::size_t i = 0; i < m; ++i) {
          alpha += bp[i] * bp[i];
          beta += bq[i] * bq[i];
          gamma += bp[i] * bq[i];
        }
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        double* wp = b[p].data();
        double* wq = b[q].data();
        for (std::size_t i = 0; i < m; ++i) {
          const double x = wp[i], y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double x = v[p][i], y = v[q][i];
          v[p][i] = c * x - s * y;
          v[q][i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(b[j]);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult r;
  r.sigma.resize(n);
  r.u = Matrix(m, n);
  r.v = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    r.sigma[k] = sigma[j];
    const double inv = sigma[j] > 0.0 ? 1.0 / sigma[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) r.u(i, k) = b[j][i] * inv;
    for (std::size_t i = 0; i < n; ++i) r.v(i, k) = v[j][i];
  }
  return r;
}

}  // namespace detail

inline SvdResult svd(const Matrix& a) {
  require_finite(a, "svd");
  if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("svd: empty matrix");
  if (a.rows >= a.cols) return detail::jacobi_svd_tall(a);
  SvdResult t = detail::jacobi_svd_tall(a.transposed());
  std::swap(t.u, t.v);
  return t;
}

/// Singular values of m, descending, each >= 0.
inline std::vector<double> svd_singular_values(const Matrix& m) {
  return svd(m).sigma;
}

/// Sample Pearson correlation; nullopt when either column has zero variance.
inline std::optional<double> pearson(std::span<const double> a,
                                     std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need length >= 2");
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace sgdlab
