#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgdlab/dataset.hpp"
#include "sgdlab/metrics.hpp"
#include "sgdlab/model.hpp"
#include "sgdlab/optim.hpp"
#include "sgdlab/schedule.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab {

enum class OptimizerKind { Sgd, Gd, LabelNoiseGd };

inline std::string optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Gd: return "gd";
    case OptimizerKind::LabelNoiseGd: return "label-noise-gd";
  }
  return "?";
}

inline OptimizerKind optimizer_from_name(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "gd") return OptimizerKind::Gd;
  if (s == "label-noise-gd") return OptimizerKind::LabelNoiseGd;
  throw std::invalid_argument("unknown optimizer: " + s);
}

struct RunConfig {
  ModelState init;
  Dataset train;
  std::optional<Dataset> test;
  std::optional<Matrix> rank_probe;  // fresh inputs, typically p rows
  Schedule schedule;
  std::uint64_t seed = 0;
  long cadence = 1;        // iterations between cheap metrics
  long rank_cadence = 0;   // iterations between SVD-based metrics; 0 = never
  int batch_size = 1;
  MetricThresholds thresholds;
  std::vector<long> snapshot_iters;  // defaults to default_snapshots(T)
};

namespace detail {

inline MetricRecord measure(const ModelState& m, const RunConfig& cfg, long iteration,
                            double eta, bool with_rank) {
  MetricRecord r;
  r.iteration = iteration;
  r.step_size = eta;
  r.train_loss = loss(m, cfg.train);
  if (cfg.test) r.test_loss = loss(m, *cfg.test);
  if (m.arch == Arch::DiagonalLinear)
    r.l0_beta = l0_beta(m, cfg.thresholds.l0_rel);
  if (m.arch == Arch::TwoLayerRelu || m.arch == Arch::ThreeLayerRelu) {
    r.feature_sparsity_l1 =
        feature_sparsity(activations(m, cfg.train.X, 1), cfg.thresholds.corr_rho,
                         cfg.thresholds.active_eps, cfg.thresholds.corr_absolute);
    if (m.arch == Arch::ThreeLayerRelu)
      r.feature_sparsity_l2 =
          feature_sparsity(activations(m, cfg.train.X, 2), cfg.thresholds.corr_rho,
                           cfg.thresholds.active_eps, cfg.thresholds.corr_absolute);
  }
  if (with_rank) {
    const Matrix& probe_x = cfg.rank_probe ? *cfg.rank_probe : cfg.train.X;
    const Matrix phi = jacobian(m, probe_x);
    r.jacobian_rank = jacobian_rank(phi, cfg.thresholds.rank_tau);
    const std::vector<double> norms = column_norms(phi);
    r.max_col_norm = norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
  }
  return r;
}

inline nlohmann::json run_header(const RunConfig& cfg, const std::string& optimizer) {
  nlohmann::json j;
  j["optimizer"] = optimizer;
  j["arch"] = arch_name(cfg.init.arch);
  j["seed"] = cfg.seed;
  j["iterations"] = cfg.schedule.horizon;
  j["batch_size"] = cfg.batch_size;
  j["cadence"] = cfg.cadence;
  j["rank_cadence"] = cfg.rank_cadence;
  j["schedule"] = {{"kind", schedule_kind_name(cfg.schedule.kind)},
                   {"eta0", cfg.schedule.eta0},
                   {"eta_max", cfg.schedule.eta_max},
                   {"decay_fraction", cfg.schedule.decay_fraction},
                   {"decay_factor", cfg.schedule.decay_factor},
                   {"warmup_exponent", cfg.schedule.warmup_exponent},
                   {"warmup_steps", cfg.schedule.warmup_steps}};
  j["thresholds"] = {{"rank_tau", cfg.thresholds.rank_tau},
                     {"corr_rho", cfg.thresholds.corr_rho},
                     {"corr_absolute", cfg.thresholds.corr_absolute},
                     {"active_eps", cfg.thresholds.active_eps},
                     {"l0_rel", cfg.thresholds.l0_rel}};
  return j;
}

}  // namespace detail

/// Iterate the chosen step rule for the schedule's horizon, recording metrics
/// at the configured cadences. Deterministic given the config (incl. seed).
/// On divergence the partial log is returned with the diverged flag set.
inline TrajectoryLog run(const RunConfig& cfg, OptimizerKind kind) {
  const long T = cfg.schedule.horizon;
  if (cfg.cadence < 1) throw std::invalid_argument("run: cadence >= 1 required");
  TrajectoryLog log;
  log.header = detail::run_header(cfg, optimizer_name(kind));
  std::vector<long> snaps =
      cfg.snapshot_iters.empty() ? default_snapshots(T) : cfg.snapshot_iters;
  std::sort(snaps.begin(), snaps.end());

  ModelState m = cfg.init;
  SampleIndexStream indices(cfg.seed, cfg.train.size(), cfg.batch_size);

  auto want_rank = [&](long t) {
    return cfg.rank_cadence > 0 && (t % cfg.rank_cadence == 0 || t == T);
  };
  auto want_snap = [&](long t) {
    return std::binary_search(snaps.begin(), snaps.end(), t);
  };

  log.records.push_back(detail::measure(m, cfg, 0, T > 0 ? step_size(cfg.schedule, 0) : 0.0,
                                        want_rank(0)));
  if (want_snap(0)) log.snapshots.emplace_back(0, m.theta);

  try {
    for (long t = 0; t < T; ++t) {
      const double eta = step_size(cfg.schedule, t);
      switch (kind) {
        case OptimizerKind::Sgd: {
          if (cfg.batch_size == 1) {
            m = sgd_step(m, cfg.train, indices.draw_one(), eta, t);
          } else {
            const auto batch = indices.draw_batch();
            m = sgd_minibatch_step(m, cfg.train, batch, eta, t);
          }
          break;
        }
        case OptimizerKind::Gd:
          m = gd_step(m, cfg.train, eta, t);
          break;
        case OptimizerKind::LabelNoiseGd: {
          // Coupled to the SGD index stream: reproduces the SGD run exactly.
          const std::vector<double> xi =
              label_noise_vector(m, cfg.train, indices.draw_one());
          m = label_noise_gd_step(m, cfg.train, xi, eta, t);
          break;
        }
      }
      const long it = t + 1;
      if (it % 256 == 0 || it == T) guard_divergence(m, cfg.train, it);
      if (it % cfg.cadence == 0 || it == T)
        log.records.push_back(detail::measure(m, cfg, it, eta, want_rank(it)));
      if (want_snap(it)) log.snapshots.emplace_back(it, m.theta);
    }
  } catch (const DivergenceError& e) {
    log.diverged = true;
    log.diverged_at = e.iteration();
    return log;
  }
  return log;
}

}  // namespace sgdlab
