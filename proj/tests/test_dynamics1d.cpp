#include <doctest.h>

#include <cmath>

#include "sgdlab/dynamics1d.hpp"

using namespace sgdlab;
using namespace sgdlab::dynamics1d;

namespace {

// Random admissible parameter set: gamma support inside (1, 1.25).
QuadParams random_admissible(RngStream& rng) {
  QuadParams p;
  p.theta_star = rng.uniform(0.5, 2.0);
  p.x_min = rng.uniform(0.5, 1.5);
  const double g_lo = rng.uniform(1.01, 1.15);
  const double g_hi = rng.uniform(g_lo + 0.01, 1.24);
  p.eta = g_lo / (p.theta_star * p.theta_star * p.x_min * p.x_min);
  p.x_max = std::sqrt(g_hi / (p.eta * p.theta_star * p.theta_star));
  p.theta0 = rng.uniform(0.2, 0.9) * p.theta_star;
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("single step map examples") {
  CHECK(quad_step(1.0, 0.7) == 1.0);
  CHECK(quad_step(1.0, 1.24) == 1.0);
  CHECK(std::abs(quad_step(1.162, 1.25) - 0.652) < 2e-3);
  CHECK(quad_step(0.65, 1.0) == doctest::Approx(1.025375).epsilon(1e-6));
  CHECK(quad_step(0.65, 1.0) > 1.02);
}

TEST_CASE("peak formula matches a dense grid search") {
  for (double gamma : {1.0, 1.05, 1.1, 1.2, 1.25}) {
    double grid_max = 0.0;
    for (int k = 1; k <= 2000000; ++k) {
      const double theta = static_cast<double>(k) / 2000000.0;
      grid_max = std::max(grid_max, quad_step(theta, gamma));
    }
    CHECK(quad_step_peak(gamma) == doctest::Approx(grid_max).epsilon(1e-10));
  }
  CHECK(quad_step_peak(1.25) < 1.162);
}

TEST_CASE("two-step envelope sandwich on random triples") {
  RngStream rng(5);
  for (int rep = 0; rep < 10000; ++rep) {
    const double g_lo = rng.uniform(1.0001, 1.2);
    const double g_hi = rng.uniform(g_lo, 1.2499);
    const double a = rng.uniform(g_lo, g_hi);
    const double b = rng.uniform(g_lo, g_hi);
    const double theta = rng.uniform(0.6501, 0.9999);
    const auto [lower, upper] = envelope_bounds(g_lo, g_hi, theta);
    const double mid = quad_step(quad_step(theta, b), a);
    CHECK(lower <= mid + 1e-12);
    CHECK(mid <= upper + 1e-12);
  }
}

TEST_CASE("two-step map repels from 1 just below the fixed point") {
  for (double gamma = 1.001; gamma < 1.25; gamma += 0.01)
    for (double theta = 0.99; theta < 0.99995; theta += 0.0005)
      CHECK(quad_two_step(theta, gamma) < theta);
}

TEST_CASE("epsilon_o formula") {
  QuadParams p;
  p.theta_star = 1.0;
  p.x_min = 1.0;
  p.x_max = 1.05;
  p.eta = 1.06;
  CHECK(p.epsilon_o() == doctest::Approx(0.02));
  p.eta = 1.03;
  CHECK(p.epsilon_o() == doctest::Approx(0.01));
  CHECK(p.admissible());
  p.eta = 0.9;
  CHECK(!p.admissible());
}

TEST_CASE("parameter validation") {
  QuadParams p;
  p.theta_star = 1.0;
  p.x_min = 1.0;
  p.x_max = 1.02;
  p.eta = 1.05;
  p.theta0 = 0.5;
  CHECK_NOTHROW(p.validate());
  QuadParams bad = p;
  bad.x_max = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.theta0 = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.eta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("raw and rescaled simulation paths agree with coupled draws") {
  RngStream rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    QuadParams p = random_admissible(rng);
    std::vector<double> rescaled;
    // Short horizon: the admissible regime is locally expanding, so 1-ulp
    // rounding differences between the two algebraic routes grow exponentially
    // over long runs; agreement is audited before amplification matters.
    const std::vector<double> raw = simulate(p, 200, 11 + rep, &rescaled);
    REQUIRE(raw.size() == rescaled.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
      CHECK(std::abs(raw[i] - rescaled[i]) <= 1e-12 * p.theta_star);
  }
}

TEST_CASE("small step size converges monotonically in the tail") {
  QuadParams p;
  p.theta_star = 1.0;
  p.x_min = 0.9;
  p.x_max = 1.0;
  p.eta = 0.5;  // gamma_max = 0.5 < 1: contraction toward theta_star
  p.theta0 = 0.3;
  const auto traj = simulate(p, 2000, 3);
  for (std::size_t i = 1500; i + 1 < traj.size(); ++i) {
    CHECK(traj[i] <= 1.0);  // converges to theta_star from below, no bouncing
    CHECK(traj[i + 1] >= traj[i]);
  }
  const StabilityReport rep = verify(p, traj);
  CHECK(!rep.applicable);
  CHECK(!rep.bouncing);
}

TEST_CASE("admissible runs stay bounded over many configs") {
  RngStream rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const QuadParams p = random_admissible(rng);
    const auto traj = simulate(p, 100000, 1000 + static_cast<std::uint64_t>(rep));
    for (double v : traj) {
      const double phi = v / p.theta_star;
      CHECK(phi > 0.0);
      CHECK(phi < 1.162);
    }
  }
}

TEST_CASE("admissible run passes the full stability audit") {
  RngStream rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const QuadParams p = random_admissible(rng);
    const auto traj = simulate(p, 100000, 55 + static_cast<std::uint64_t>(rep));
    const StabilityReport report = verify(p, traj);
    CHECK(report.applicable);
    CHECK(report.bounded);
    CHECK(report.transient_end >= 0);
    CHECK(report.loss_band);
    CHECK(report.bouncing);
    // Tail parity: the last 10^4 steps alternate around theta_star.
    const std::size_t tail = traj.size() - 10000;
    const long offset = static_cast<long>(tail) - report.transient_end;
    for (std::size_t i = tail; i < traj.size(); ++i) {
      const double phi = traj[i] / p.theta_star;
      const bool even = ((static_cast<long>(i) - report.transient_end) % 2) == 0;
      if (even) CHECK(phi < 1.0);
      else CHECK(phi > 1.0);
    }
    (void)offset;
  }
}

TEST_CASE("verify verdicts survive extension by passing steps") {
  RngStream rng(19);
  const QuadParams p = random_admissible(rng);
  const auto full = simulate(p, 60000, 77);
  const StabilityReport rep_full = verify(p, full);
  REQUIRE(rep_full.bouncing);
  // Same seed, shorter horizon: a prefix of the same path.
  const auto prefix = simulate(p, 30000, 77);
  for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(prefix[i] == full[i]);
  const StabilityReport rep_prefix = verify(p, prefix);
  CHECK(rep_prefix.transient_end == rep_full.transient_end);
  CHECK(rep_prefix.bounded);
  CHECK(rep_prefix.loss_band);
  CHECK(rep_prefix.bouncing);
}

TEST_CASE("rescaled loss formula") {
  CHECK(rescaled_loss(1.0, 1.0) == 0.0);
  CHECK(rescaled_loss(0.0, 1.0) == doctest::Approx(0.25));
  CHECK(rescaled_loss(2.0, 2.0) == 0.0);
  // Units: scaling theta and theta_star together leaves the value unchanged.
  CHECK(rescaled_loss(0.9 * 3.0, 3.0) == doctest::Approx(rescaled_loss(0.9, 1.0)));
}
