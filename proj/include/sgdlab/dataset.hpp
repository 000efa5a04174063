#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sgdlab/matrix.hpp"
#include "sgdlab/model.hpp"
#include "sgdlab/rng.hpp"

namespace sgdlab {

/// The law the inputs were drawn from; used to draw fresh evaluation sets.
enum class InputLaw { StandardNormal, UniformInterval, Fixed };

struct Dataset {
  Matrix X;               // n x d
  std::vector<double> y;  // n
  InputLaw law = InputLaw::StandardNormal;
  double law_lo = 0.0, law_hi = 0.0;  // UniformInterval bounds
  // Ground truth, when the generator knows it.
  std::optional<std::vector<double>> beta_star;
  std::optional<ModelState> teacher;
  std::optional<double> theta_star;

  std::size_t size() const { return X.rows; }
  int dim() const { return static_cast<int>(X.cols); }
};

/// y = X beta*, X iid standard normal, beta* supported on r uniformly random
/// coordinates with iid Rademacher (+-1) values.
inline Dataset sparse_regression(std::uint64_t seed, int n = 80, int d = 200,
                                 int r = 20) {
  if (r > d) throw std::invalid_argument("sparse_regression: r > d");
  RngStream rng(seed);
  Dataset ds;
  ds.law = InputLaw::StandardNormal;
  ds.X = Matrix::gaussian(static_cast<std::size_t>(n), static_cast<std::size_t>(d), rng);
  std::vector<double> beta(static_cast<std::size_t>(d), 0.0);
  // Partial Fisher-Yates for the support.
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int k = 0; k < r; ++k) {
    const std::size_t j =
        static_cast<std::size_t>(k) + rng.uniform_index(static_cast<std::size_t>(d - k));
    std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
    beta[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] =
        rng.next_double() < 0.5 ? -1.0 : 1.0;
  }
  ds.beta_star = beta;
  ds.y.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ds.X.rows; ++i) ds.y[i] = dot(ds.X.row(i), beta);
  return ds;
}

/// The fixed 12-point 1D set used by the small regression experiment. The
/// exact points are a committed, non-canonical choice of this repo: x strictly
/// increasing in [-1, 1], targets of mixed sign with |y| <= 1. The targets sit
/// on a piecewise-linear curve with three kinks (at x = -0.7, 0.05, 0.6), so an
/// interpolating two-layer ReLU predictor with very few distinct units exists.
inline Dataset regression_1d(std::uint64_t /*seed*/ = 0) {
  static const double xs[12] = {-1.0, -0.85, -0.65, -0.45, -0.25, -0.05,
                                0.1,  0.3,   0.5,   0.7,   0.85,  1.0};
  // y = -0.4 + 1.8 relu(x + 0.7) - 3.2 relu(x - 0.05) + 2.2 relu(x - 0.6)
  static const double ys[12] = {-0.4, -0.4, -0.31, 0.05, 0.41, 0.77,
                                0.88, 0.6,  0.32,  0.26, 0.38, 0.5};
  Dataset ds;
  ds.law = InputLaw::UniformInterval;
  ds.law_lo = -1.0;
  ds.law_hi = 1.0;
  ds.X = Matrix(12, 1);
  ds.y.resize(12);
  for (std::size_t i = 0; i < 12; ++i) {
    ds.X(i, 0) = xs[i];
    ds.y[i] = ys[i];
  }
  return ds;
}

/// Teacher network with unit-Gaussian weights; X iid standard normal;
/// y = teacher predictions. Returns the dataset and a freshly initialized
/// student of the given width.
inline std::pair<Dataset, ModelState> teacher_student(std::uint64_t seed, int depth,
                                                      int teacher_width,
                                                      int student_width, int n, int d,
                                                      double student_scale = 1.0) {
  if (teacher_width < 1 || student_width < 1)
    throw std::invalid_argument("teacher_student: widths must be >= 1");
  if (depth != 2 && depth != 3)
    throw std::invalid_argument("teacher_student: depth must be 2 or 3");
  RngStream rng(seed);
  const double teacher_scale_units = 1.0;  // unit Gaussian entries
  ModelState teacher;
  if (depth == 2) {
    teacher = make_two_layer_relu(d, teacher_width, /*bias=*/false, 1.0, rng);
  } else {
    teacher = make_three_layer_relu(d, teacher_width, teacher_width,
                                    /*bias=*/false, 1.0, rng);
  }
  // Rescale to unit-variance entries (builders divide by sqrt(fan_in)).
  {
    RngStream wrng(seed ^ 0x7465616368ULL);
    for (auto& w : teacher.theta) w = teacher_scale_units * wrng.gaussian();
  }
  Dataset ds;
  ds.law = InputLaw::StandardNormal;
  ds.X = Matrix::gaussian(static_cast<std::size_t>(n), static_cast<std::size_t>(d), rng);
  ds.y.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ds.X.rows; ++i) ds.y[i] = predict(teacher, ds.X.row(i));
  ds.teacher = teacher;
  ModelState student;
  RngStream srng(seed ^ 0x73747564656e74ULL);
  if (depth == 2) {
    student = make_two_layer_relu(d, student_width, /*bias=*/false, student_scale, srng);
  } else {
    student = make_three_layer_relu(d, student_width, student_width,
                                    /*bias=*/false, student_scale, srng);
  }
  return {std::move(ds), std::move(student)};
}

/// x uniform on [a, b], y = x * theta_star^2.
inline Dataset quadratic_1d(std::uint64_t seed, int n, double a, double b,
                            double theta_star) {
  if (a <= 0.0 || b <= a)
    throw std::invalid_argument("quadratic_1d: need 0 < a < b");
  RngStream rng(seed);
  Dataset ds;
  ds.law = InputLaw::UniformInterval;
  ds.law_lo = a;
  ds.law_hi = b;
  ds.theta_star = theta_star;
  ds.X = Matrix(static_cast<std::size_t>(n), 1);
  ds.y.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ds.X.rows; ++i) {
    ds.X(i, 0) = rng.uniform(a, b);
    ds.y[i] = ds.X(i, 0) * theta_star * theta_star;
  }
  return ds;
}

/// Fresh inputs drawn from the same law as ds (for rank probes and test sets).
inline Matrix fresh_inputs(const Dataset& ds, std::uint64_t seed, int n) {
  RngStream rng(seed);
  const std::size_t rows = static_cast<std::size_t>(n);
  const std::size_t cols = ds.X.cols;
  switch (ds.law) {
    case InputLaw::StandardNormal:
      return Matrix::gaussian(rows, cols, rng);
    case InputLaw::UniformInterval: {
      Matrix m(rows, cols);
      for (auto& v : m.data) v = rng.uniform(ds.law_lo, ds.law_hi);
      return m;
    }
    case InputLaw::Fixed:
      throw std::invalid_argument("fresh_inputs: dataset has no sampling law");
  }
  throw std::invalid_argument("fresh_inputs: bad law");
}

/// Ground-truth labels for arbitrary inputs; requires a stored ground truth.
inline std::vector<double> ground_truth_labels(const Dataset& ds, const Matrix& X) {
  std::vector<double> y(X.rows);
  if (ds.beta_star) {
    for (std::size_t i = 0; i < X.rows; ++i) y[i] = dot(X.row(i), *ds.beta_star);
  } else if (ds.teacher) {
    for (std::size_t i = 0; i < X.rows; ++i) y[i] = predict(*ds.teacher, X.row(i));
  } else if (ds.theta_star) {
    for (std::size_t i = 0; i < X.rows; ++i)
      y[i] = X(i, 0) * (*ds.theta_star) * (*ds.theta_star);
  } else {
    throw std::invalid_argument("ground_truth_labels: no ground truth stored");
  }
  return y;
}

/// Fresh dataset from the same law with ground-truth labels.
inline Dataset fresh_like(const Dataset& ds, std::uint64_t seed, int n) {
  Dataset out;
  out.law = ds.law;
  out.law_lo = ds.law_lo;
  out.law_hi = ds.law_hi;
  out.X = fresh_inputs(ds, seed, n);
  out.y = ground_truth_labels(ds, out.X);
  out.beta_star = ds.beta_star;
  out.teacher = ds.teacher;
  out.theta_star = ds.theta_star;
  return out;
}

}  // namespace sgdlab
