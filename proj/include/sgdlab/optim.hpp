#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdlab/dataset.hpp"
#include "sgdlab/metrics.hpp"
#include "sgdlab/model.hpp"
#include "sgdlab/rng.hpp"

namespace sgdlab {

/// Thrown when a run leaves the finite regime; carries the iteration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, const std::string& what)
      : std::runtime_error("divergence at iteration " + std::to_string(iteration) +
                           ": " + what),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

/// Uniform-with-replacement index draws, replayable from the seed.
struct SampleIndexStream {
  RngStream rng;
  std::size_t n;
  int batch_size = 1;

  SampleIndexStream(std::uint64_t seed, std::size_t n_, int batch = 1)
      : rng(seed), n(n_), batch_size(batch) {
    if (batch < 1) throw std::invalid_argument("SampleIndexStream: B >= 1");
  }

  std::size_t draw_one() { return rng.uniform_index(n); }

  std::vector<std::size_t> draw_batch() {
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch_size));
    for (auto& i : idx) i = draw_one();
    return idx;
  }
};

namespace detail {

inline void check_finite_update(const std::vector<double>& theta, long iteration) {
  for (double v : theta)
    if (!std::isfinite(v)) throw DivergenceError(iteration, "non-finite parameter");
}

}  // namespace detail

/// Single-sample SGD update: theta <- theta - eta * r_{i_t} * grad h(x_{i_t}).
inline ModelState sgd_step(const ModelState& m, const Dataset& ds, std::size_t i_t,
                           double eta, long iteration = 0) {
  if (i_t >= ds.size()) throw std::invalid_argument("sgd_step: index out of range");
  ModelState next = m;
  const double r = predict(m, ds.X.row(i_t)) - ds.y[i_t];
  const std::vector<double> g = per_sample_gradient(m, ds.X.row(i_t));
  for (std::size_t k = 0; k < next.theta.size(); ++k) next.theta[k] -= eta * r * g[k];
  detail::check_finite_update(next.theta, iteration);
  return next;
}

/// Mini-batch variant: average the sampled gradients before stepping.
inline ModelState sgd_minibatch_step(const ModelState& m, const Dataset& ds,
                                     std::span<const std::size_t> batch, double eta,
                                     long iteration = 0) {
  if (batch.empty()) throw std::invalid_argument("sgd_minibatch_step: empty batch");
  ModelState next = m;
  const double scale = eta / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    if (i >= ds.size())
      throw std::invalid_argument("sgd_minibatch_step: index out of range");
    const double r = predict(m, ds.X.row(i)) - ds.y[i];
    const std::vector<double> g = per_sample_gradient(m, ds.X.row(i));
    for (std::size_t k = 0; k < next.theta.size(); ++k)
      next.theta[k] -= scale * r * g[k];
  }
  detail::check_finite_update(next.theta, iteration);
  return next;
}

/// Full-batch GD update: theta <- theta - (eta/n) sum_i r_i grad h(x_i).
inline ModelState gd_step(const ModelState& m, const Dataset& ds, double eta,
                          long iteration = 0) {
  ModelState next = m;
  const double scale = eta / static_cast<double>(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = predict(m, ds.X.row(i)) - ds.y[i];
    const std::vector<double> g = per_sample_gradient(m, ds.X.row(i));
    for (std::size_t k = 0; k < next.theta.size(); ++k)
      next.theta[k] -= scale * r * g[k];
  }
  detail::check_finite_update(next.theta, iteration);
  return next;
}

/// xi_i = r_i (1 - n 1_{i = i_t}): the label noise under which full-batch GD
/// reproduces the SGD step with index i_t.
inline std::vector<double> label_noise_vector(const ModelState& m, const Dataset& ds,
                                              std::size_t i_t) {
  if (i_t >= ds.size())
    throw std::invalid_argument("label_noise_vector: index out of range");
  std::vector<double> xi = residuals(m, ds);
  const double n = static_cast<double>(ds.size());
  for (std::size_t i = 0; i < xi.size(); ++i)
    xi[i] *= (i == i_t ? 1.0 - n : 1.0);
  return xi;
}

/// Full-batch GD on the noisy labels y + xi:
/// theta <- theta - (eta/n) sum_i (h(x_i) - y_i - xi_i) grad h(x_i).
inline ModelState label_noise_gd_step(const ModelState& m, const Dataset& ds,
                                      std::span<const double> xi, double eta,
                                      long iteration = 0) {
  if (xi.size() != ds.size())
    throw std::invalid_argument("label_noise_gd_step: xi length mismatch");
  ModelState next = m;
  const double scale = eta / static_cast<double>(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = predict(m, ds.X.row(i)) - ds.y[i] - xi[i];
    const std::vector<double> g = per_sample_gradient(m, ds.X.row(i));
    for (std::size_t k = 0; k < next.theta.size(); ++k)
      next.theta[k] -= scale * r * g[k];
  }
  detail::check_finite_update(next.theta, iteration);
  return next;
}

/// Divergence guard shared by the runners.
inline void guard_divergence(const ModelState& m, const Dataset& ds, long iteration) {
  const double nrm = norm2(m.theta);
  if (!(nrm <= 1e8)) throw DivergenceError(iteration, "parameter norm > 1e8");
  const double l = loss(m, ds);
  if (!(l <= 1e12)) throw DivergenceError(iteration, "loss > 1e12");
}

}  // namespace sgdlab
