#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgdlab/runner.hpp"

namespace sgdlab {

/// Euler-Maruyama surrogate for the effective dynamics:
///   theta <- theta - gamma * grad L + sqrt(gamma) * sqrt(eta * delta) * phi^T z
/// with z ~ N(0, I_n) drawn fresh each step.
inline ModelState sde_step(const ModelState& m, const Dataset& ds, double gamma,
                           double eta, double delta, std::span<const double> z,
                           long iteration = 0) {
  if (z.size() != ds.size())
    throw std::invalid_argument("sde_step: noise length must equal sample count");
  if (gamma <= 0.0 || eta <= 0.0 || delta < 0.0)
    throw std::invalid_argument("sde_step: need gamma, eta > 0 and delta >= 0");
  ModelState next = m;
  const double drift_scale = gamma / static_cast<double>(ds.size());
  const double noise_scale = std::sqrt(gamma * eta * delta);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = predict(m, ds.X.row(i)) - ds.y[i];
    const std::vector<double> g = per_sample_gradient(m, ds.X.row(i));
    const double noise_i = noise_scale * z[i];
    for (std::size_t k = 0; k < next.theta.size(); ++k)
      next.theta[k] += -drift_scale * r * g[k] + noise_i * g[k];
  }
  detail::check_finite_update(next.theta, iteration);
  return next;
}

struct SdeConfig {
  double gamma_divisor = 10.0;    // gamma_t = eta_t / gamma_divisor
  double noise_constant = 1.0;    // c in delta_t = c * L_ref; 0 = gradient flow
  long horizon_multiplier = 10;   // run this many times longer than the reference
  std::uint64_t seed = 0;
};

namespace detail {

/// Reference curves indexed by SGD iteration, piecewise-constant between the
/// recorded metric points of the paired run.
struct ReferenceCurves {
  const TrajectoryLog* log;
  double eta_at(long sgd_iter) const {
    return log->record_at_or_before(sgd_iter).step_size;
  }
  double loss_at(long sgd_iter) const {
    return log->record_at_or_before(sgd_iter).train_loss;
  }
};

}  // namespace detail

/// Simulate the SDE discretization paired to an SGD reference run. The base
/// config supplies model, data, thresholds and cadences; the schedule and
/// noise intensity are read off the reference log:
///   eta_t = eta^SGD_{floor(t/mult)},  delta_t = c * L^SGD_{floor(t/mult)}.
inline TrajectoryLog run_sde(const RunConfig& base, const SdeConfig& scfg,
                             const TrajectoryLog& reference) {
  if (reference.records.empty())
    throw std::invalid_argument("run_sde: reference log is empty");
  const long ref_T = reference.records.back().iteration;
  const long T = ref_T * scfg.horizon_multiplier;
  detail::ReferenceCurves ref{&reference};

  TrajectoryLog log;
  log.header = detail::run_header(base, "sde");
  log.header["sde"] = {{"gamma_divisor", scfg.gamma_divisor},
                       {"noise_constant", scfg.noise_constant},
                       {"horizon_multiplier", scfg.horizon_multiplier},
                       {"reference_iterations", ref_T}};
  std::vector<long> snaps =
      base.snapshot_iters.empty() ? default_snapshots(T) : base.snapshot_iters;
  std::sort(snaps.begin(), snaps.end());

  ModelState m = base.init;
  RngStream rng(scfg.seed);

  auto want_rank = [&](long t) {
    return base.rank_cadence > 0 &&
           (t % (base.rank_cadence * scfg.horizon_multiplier) == 0 || t == T);
  };

  log.records.push_back(
      detail::measure(m, base, 0, ref.eta_at(0) / scfg.gamma_divisor, want_rank(0)));
  if (std::binary_search(snaps.begin(), snaps.end(), 0L))
    log.snapshots.emplace_back(0, m.theta);

  std::vector<double> z(base.train.size());
  const long cadence = base.cadence * scfg.horizon_multiplier;
  try {
    for (long t = 0; t < T; ++t) {
      const long sgd_iter = t / scfg.horizon_multiplier;
      const double eta = ref.eta_at(sgd_iter);
      const double gamma = eta / scfg.gamma_divisor;
      const double delta = scfg.noise_constant * ref.loss_at(sgd_iter);
      for (auto& v : z) v = rng.gaussian();
      m = sde_step(m, base.train, gamma, eta, delta, z, t);
      const long it = t + 1;
      if (it % 256 == 0 || it == T) guard_divergence(m, base.train, it);
      if (it % cadence == 0 || it == T)
        log.records.push_back(detail::measure(m, base, it, gamma, want_rank(it)));
      if (std::binary_search(snaps.begin(), snaps.end(), it))
        log.snapshots.emplace_back(it, m.theta);
    }
  } catch (const DivergenceError& e) {
    log.diverged = true;
    log.diverged_at = e.iteration();
    return log;
  }
  return log;
}

/// Empirical variance of <v, B_t> simulated by summed Brownian increments.
/// The law identity gives variance ||v||^2 t.
inline double brownian_projection_check(std::span<const double> v, double t,
                                        int trials, std::uint64_t seed = 0,
                                        int increments = 16) {
  if (trials < 1000)
    throw std::invalid_argument("brownian_projection_check: trials >= 1000");
  RngStream rng(seed);
  const double sqrt_dt = std::sqrt(t / static_cast<double>(increments));
  double sum = 0.0, sum_sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    double proj = 0.0;
    for (int step = 0; step < increments; ++step)
      for (double vi : v) proj += vi * sqrt_dt * rng.gaussian();
    sum += proj;
    sum_sq += proj * proj;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  return sum_sq / n - mean * mean;
}

}  // namespace sgdlab
