#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgdlab/rng.hpp"

namespace sgdlab {
namespace dynamics1d {

/// One step of the rescaled quadratic-parameterization recursion:
/// theta <- theta + gamma * theta * (1 - theta^2).
inline double quad_step(double theta, double gamma) {
  return theta + gamma * theta * (1.0 - theta * theta);
}

/// Two-step composition h_gamma(h_gamma(theta)).
inline double quad_two_step(double theta, double gamma) {
  return quad_step(quad_step(theta, gamma), gamma);
}

/// Peak of h_gamma over theta in (0, 1]: attained at sqrt((1/gamma + 1)/3).
inline double quad_step_peak(double gamma) {
  return 2.0 * std::pow(1.0 + gamma, 1.5) / (3.0 * std::sqrt(3.0 * gamma));
}

struct QuadParams {
  double theta_star = 1.0;  // target, > 0
  double x_min = 0.0;       // support lower bound, > 0
  double x_max = 0.0;       // support upper bound, > x_min
  double eta = 0.0;         // step size, > 0
  double theta0 = 0.5;      // init in (0, theta_star)

  double gamma_min() const { return eta * theta_star * theta_star * x_min * x_min; }
  double gamma_max() const { return eta * theta_star * theta_star * x_max * x_max; }
  /// eta inside ((theta* x_min)^-2, 1.25 (theta* x_max)^-2), i.e. the
  /// rescaled-step support sits in (1, 1.25).
  bool admissible() const { return gamma_min() > 1.0 && gamma_max() < 1.25; }
  double epsilon_o() const {
    return std::min((gamma_min() - 1.0) / 3.0, 0.02);
  }

  void validate() const {
    if (theta_star <= 0.0) throw std::invalid_argument("QuadParams: theta_star > 0");
    if (x_min <= 0.0 || x_max <= x_min)
      throw std::invalid_argument("QuadParams: need 0 < x_min < x_max");
    if (eta <= 0.0) throw std::invalid_argument("QuadParams: eta > 0");
    if (theta0 <= 0.0 || theta0 >= theta_star)
      throw std::invalid_argument("QuadParams: theta0 in (0, theta_star)");
  }
};

/// Rescaled per-draw loss (in units of theta_star^2): (1/4)(1 - phi^2)^2 with
/// phi = theta / theta_star.
inline double rescaled_loss(double theta, double theta_star) {
  const double phi = theta / theta_star;
  const double r = 1.0 - phi * phi;
  return 0.25 * r * r;
}

/// Simulate the SGD recursion theta <- theta + eta theta x^2 (theta*^2 -
/// theta^2) with x uniform on [x_min, x_max]. Returns the raw trajectory
/// (theta0 first, steps+1 values). When rescaled_out is non-null the coupled
/// rescaled recursion (same x draws) is run alongside and written there in
/// original units, for cross-checking the two algebraic routes.
inline std::vector<double> simulate(const QuadParams& p, long steps,
                                    std::uint64_t seed,
                                    std::vector<double>* rescaled_out = nullptr) {
  p.validate();
  if (steps < 1) throw std::invalid_argument("simulate: steps >= 1");
  RngStream rng(seed);
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(steps) + 1);
  raw.push_back(p.theta0);
  if (rescaled_out) {
    rescaled_out->clear();
    rescaled_out->reserve(static_cast<std::size_t>(steps) + 1);
    rescaled_out->push_back(p.theta0);
  }
  double theta = p.theta0;
  double phi = p.theta0 / p.theta_star;
  const double ts2 = p.theta_star * p.theta_star;
  for (long t = 0; t < steps; ++t) {
    const double x = rng.uniform(p.x_min, p.x_max);
    const double x2 = x * x;
    theta = theta + p.eta * theta * x2 * (ts2 - theta * theta);
    if (!std::isfinite(theta))
      throw std::runtime_error("simulate: diverged at step " + std::to_string(t));
    raw.push_back(theta);
    if (rescaled_out) {
      phi = quad_step(phi, p.eta * ts2 * x2);
      rescaled_out->push_back(phi * p.theta_star);
    }
  }
  return raw;
}

/// Verdict record for the stabilization checks.
struct StabilityReport {
  bool applicable = false;  // false when eta is outside the admissible range
  bool bounded = false;     // all rescaled iterates in (0, 1.162)
  bool loss_band = false;   // rescaled loss in (eps_o^2, 0.17) after transient
  bool bouncing = false;    // alternating parity around theta* over the tail
  double epsilon_o = 0.0;
  long transient_end = -1;  // first audited iteration; -1 if never detected
};

/// Transient detection: first index from which 200 consecutive steps
/// alternate parity around theta*, starting on an even-side iterate inside
/// (0.65 theta*, (1 - eps_o) theta*).
inline long detect_transient(const std::vector<double>& traj, double theta_star,
                             double eps_o, long window = 200) {
  const long n = static_cast<long>(traj.size());
  for (long t = 0; t + window < n; ++t) {
    const double phi = traj[static_cast<std::size_t>(t)] / theta_star;
    if (!(phi > 0.65 && phi < 1.0 - eps_o)) continue;
    bool ok = true;
    for (long k = 0; k <= window; ++k) {
      const double v = traj[static_cast<std::size_t>(t + k)] / theta_star;
      const bool below = v < 1.0;
      if (below != (k % 2 == 0)) {
        ok = false;
        break;
      }
    }
    if (ok) return t;
  }
  return -1;
}

/// Audit a trajectory (raw units) against the stabilization guarantees:
/// boundedness over all iterates, loss band and even/odd interval membership
/// over the tail after the detected transient.
inline StabilityReport verify(const QuadParams& p, const std::vector<double>& traj) {
  p.validate();
  if (traj.empty()) throw std::invalid_argument("verify: empty trajectory");
  StabilityReport rep;
  rep.applicable = p.admissible();
  if (!rep.applicable) return rep;
  rep.epsilon_o = p.epsilon_o();

  rep.bounded = true;
  for (double v : traj) {
    const double phi = v / p.theta_star;
    if (!(phi > 0.0 && phi < 1.162)) {
      rep.bounded = false;
      break;
    }
  }

  rep.transient_end = detect_transient(traj, p.theta_star, rep.epsilon_o);
  if (rep.transient_end < 0) return rep;

  const double lo = rep.epsilon_o * rep.epsilon_o * (1.0 - 1e-12);
  bool band_ok = true, bounce_ok = true;
  for (std::size_t i = static_cast<std::size_t>(rep.transient_end); i < traj.size();
       ++i) {
    const double phi = traj[i] / p.theta_star;
    const double f = rescaled_loss(traj[i], p.theta_star);
    if (!(f > lo && f < 0.17)) band_ok = false;
    const long k = static_cast<long>(i) - rep.transient_end;
    if (k % 2 == 0) {
      if (!(phi > 0.65 && phi < 1.0 - rep.epsilon_o)) bounce_ok = false;
    } else {
      if (!(phi > 1.0 + rep.epsilon_o && phi < 1.162)) bounce_ok = false;
    }
    if (!band_ok && !bounce_ok) break;
  }
  rep.loss_band = band_ok;
  rep.bouncing = bounce_ok;
  return rep;
}

/// Two-step sandwich: h_{gmax} o h_{gmax} <= h_a o h_b <= h_{gmin} o h_{gmin}
/// on (0.65, 1). Returns the envelope evaluations at theta.
inline std::pair<double, double> envelope_bounds(double gamma_min, double gamma_max,
                                                 double theta) {
  return {quad_two_step(theta, gamma_max), quad_two_step(theta, gamma_min)};
}

}  // namespace dynamics1d
}  // namespace sgdlab
