#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgdlab {

enum class ScheduleKind { Constant, Piecewise, LinearWarmup, ExpWarmup };

inline std::string schedule_kind_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Piecewise: return "piecewise";
    case ScheduleKind::LinearWarmup: return "linear-warmup";
    case ScheduleKind::ExpWarmup: return "exp-warmup";
  }
  return "?";
}

inline ScheduleKind schedule_kind_from_name(const std::string& s) {
  if (s == "constant") return ScheduleKind::Constant;
  if (s == "piecewise") return ScheduleKind::Piecewise;
  if (s == "linear-warmup") return ScheduleKind::LinearWarmup;
  if (s == "exp-warmup") return ScheduleKind::ExpWarmup;
  throw std::invalid_argument("unknown schedule kind: " + s);
}

/// Step-size rule eta_t over a horizon of T iterations.
///
///   constant       eta_t = eta0
///   piecewise      eta0 until ceil(f T), then eta0 / k
///   linear-warmup  ramp eta0 -> eta_max over warmup_steps, hold, then
///                  eta_max / k from ceil(f T)
///   exp-warmup     min(eta0 * rho^t, eta_max), then eta_max / k from ceil(f T)
///
/// The warmup cap eta_max is mandatory for the warmup kinds; without a cap an
/// exponential warmup diverges.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double eta0 = 0.0;
  double eta_max = 0.0;
  double decay_fraction = 1.0;   // f in (0, 1]
  double decay_factor = 1.0;     // k >= 1
  double warmup_exponent = 1.05; // rho > 1 (exp-warmup)
  long warmup_steps = 0;         // linear-warmup ramp length
  long horizon = 0;              // T
};

inline long decay_iteration(const Schedule& s) {
  return static_cast<long>(
      std::ceil(s.decay_fraction * static_cast<double>(s.horizon)));
}

inline double step_size(const Schedule& s, long t) {
  if (t < 0 || t >= s.horizon)
    throw std::invalid_argument("step_size: iteration outside horizon");
  const long t_decay = decay_iteration(s);
  switch (s.kind) {
    case ScheduleKind::Constant:
      return s.eta0;
    case ScheduleKind::Piecewise:
      return t < t_decay ? s.eta0 : s.eta0 / s.decay_factor;
    case ScheduleKind::LinearWarmup: {
      if (t >= t_decay) return s.eta_max / s.decay_factor;
      if (s.warmup_steps <= 0 || t >= s.warmup_steps) return s.eta_max;
      return s.eta0 + (s.eta_max - s.eta0) * static_cast<double>(t) /
                          static_cast<double>(s.warmup_steps);
    }
    case ScheduleKind::ExpWarmup: {
      if (t >= t_decay) return s.eta_max / s.decay_factor;
      return std::min(s.eta0 * std::pow(s.warmup_exponent, static_cast<double>(t)),
                      s.eta_max);
    }
  }
  throw std::invalid_argument("step_size: bad kind");
}

/// Mini-batch scaling: eta_t / B.
inline double effective_step(const Schedule& s, long t, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("effective_step: B must be >= 1");
  return step_size(s, t) / static_cast<double>(batch_size);
}

inline Schedule constant_schedule(double eta, long horizon) {
  Schedule s;
  s.kind = ScheduleKind::Constant;
  s.eta0 = eta;
  s.horizon = horizon;
  return s;
}

inline Schedule piecewise_schedule(double eta, double fraction, double factor,
                                   long horizon) {
  Schedule s;
  s.kind = ScheduleKind::Piecewise;
  s.eta0 = eta;
  s.decay_fraction = fraction;
  s.decay_factor = factor;
  s.horizon = horizon;
  return s;
}

inline Schedule linear_warmup_schedule(double eta0, double eta_max, long warmup_steps,
                                       double fraction, double factor, long horizon) {
  Schedule s;
  s.kind = ScheduleKind::LinearWarmup;
  s.eta0 = eta0;
  s.eta_max = eta_max;
  s.warmup_steps = warmup_steps;
  s.decay_fraction = fraction;
  s.decay_factor = factor;
  s.horizon = horizon;
  return s;
}

inline Schedule exp_warmup_schedule(double eta0, double eta_max, double rho,
                                    double fraction, double factor, long horizon) {
  Schedule s;
  s.kind = ScheduleKind::ExpWarmup;
  s.eta0 = eta0;
  s.eta_max = eta_max;
  s.warmup_exponent = rho;
  s.decay_fraction = fraction;
  s.decay_factor = factor;
  s.horizon = horizon;
  return s;
}

}  // namespace sgdlab
