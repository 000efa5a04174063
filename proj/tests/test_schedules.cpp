#include <doctest.h>

#include <cmath>

#include "sgdlab/schedule.hpp"

using namespace sgdlab;

TEST_CASE("piecewise decay point") {
  const Schedule s = piecewise_schedule(1.0, 0.5, 10.0, 100);
  CHECK(step_size(s, 0) == 1.0);
  CHECK(step_size(s, 49) == 1.0);
  CHECK(step_size(s, 50) == doctest::Approx(0.1));
  CHECK(step_size(s, 99) == doctest::Approx(0.1));
  CHECK_THROWS_AS(step_size(s, 100), std::invalid_argument);
  CHECK_THROWS_AS(step_size(s, -1), std::invalid_argument);
}

TEST_CASE("decay iteration rounds up") {
  CHECK(decay_iteration(piecewise_schedule(1.0, 0.1, 2.0, 15)) == 2);  // ceil(1.5)
  CHECK(decay_iteration(piecewise_schedule(1.0, 0.3, 2.0, 10)) == 3);
  CHECK(decay_iteration(piecewise_schedule(1.0, 1.0, 2.0, 10)) == 10);
}

TEST_CASE("exponential warmup") {
  const Schedule s = exp_warmup_schedule(0.1, 1.0, 1.05, 1.0, 1.0, 1000);
  CHECK(step_size(s, 0) == doctest::Approx(0.1));
  CHECK(step_size(s, 2) == doctest::Approx(0.11025));
  // Cap: 0.1 * 1.05^t reaches 1.0 at t = log(10)/log(1.05) ~ 47.2.
  CHECK(step_size(s, 48) == doctest::Approx(1.0));
  CHECK(step_size(s, 999) == doctest::Approx(1.0));
}

TEST_CASE("exp warmup with terminal decay") {
  const Schedule s = exp_warmup_schedule(0.1, 1.0, 1.05, 0.5, 100.0, 200);
  CHECK(step_size(s, 99) == doctest::Approx(1.0));
  CHECK(step_size(s, 100) == doctest::Approx(0.01));
}

TEST_CASE("linear warmup midpoint and hold") {
  const Schedule s = linear_warmup_schedule(0.2, 1.0, 50, 0.8, 10.0, 100);
  CHECK(step_size(s, 0) == doctest::Approx(0.2));
  CHECK(step_size(s, 25) == doctest::Approx(0.6));
  CHECK(step_size(s, 50) == doctest::Approx(1.0));
  CHECK(step_size(s, 79) == doctest::Approx(1.0));
  CHECK(step_size(s, 80) == doctest::Approx(0.1));
}

TEST_CASE("effective step scales by batch size") {
  const Schedule s = constant_schedule(1.0, 10);
  CHECK(effective_step(s, 3, 1) == 1.0);
  CHECK(effective_step(s, 3, 4) == doctest::Approx(0.25));
  CHECK_THROWS_AS(effective_step(s, 3, 0), std::invalid_argument);
  const Schedule w = exp_warmup_schedule(0.1, 2.0, 1.05, 0.5, 10.0, 100);
  for (long t = 0; t < 100; ++t)
    CHECK(effective_step(w, t, 2) == doctest::Approx(effective_step(w, t, 1) / 2.0));
}

TEST_CASE("warmup kinds are non-decreasing before decay, piecewise jumps once") {
  const Schedule lw = linear_warmup_schedule(0.1, 1.0, 30, 0.7, 5.0, 100);
  const Schedule ew = exp_warmup_schedule(0.1, 1.0, 1.05, 0.7, 5.0, 100);
  for (const Schedule& s : {lw, ew}) {
    const long td = decay_iteration(s);
    for (long t = 1; t < td; ++t) CHECK(step_size(s, t) >= step_size(s, t - 1));
  }
  const Schedule pw = piecewise_schedule(1.0, 0.4, 8.0, 100);
  int jumps = 0;
  for (long t = 1; t < 100; ++t)
    if (step_size(pw, t) != step_size(pw, t - 1)) ++jumps;
  CHECK(jumps == 1);
}

TEST_CASE("schedules are pure") {
  const Schedule s = exp_warmup_schedule(0.1, 1.0, 1.05, 0.5, 10.0, 200);
  for (long t = 0; t < 200; ++t) {
    const double a = step_size(s, t);
    CHECK(step_size(s, t) == a);
    CHECK(a > 0.0);
  }
}

TEST_CASE("kind names round-trip") {
  for (ScheduleKind k : {ScheduleKind::Constant, ScheduleKind::Piecewise,
                         ScheduleKind::LinearWarmup, ScheduleKind::ExpWarmup})
    CHECK(schedule_kind_from_name(schedule_kind_name(k)) == k);
  CHECK_THROWS_AS(schedule_kind_from_name("cosine"), std::invalid_argument);
}
