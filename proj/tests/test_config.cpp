#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sgdlab/config.hpp"

using namespace sgdlab;

namespace {

const char* kSampleConfig = R"(# sample experiment
[experiment]
name = "demo"
iterations = 500
seeds = [1, 2, 3]
cadence = 10
rank_cadence = 100
out = "out/demo"

[dataset]
kind = "sparse_regression"
n = 20
d = 40
r = 5
test_n = 10

[model]
arch = "diagonal_linear"
u0 = 0.1
v0 = 0.0

[thresholds]
rank_tau = 1e-3
corr_rho = 0.95

[run.small]
optimizer = "sgd"
schedule = "constant"
eta0 = 0.05

[run.large50]
optimizer = "sgd"
schedule = "piecewise"
eta0 = 0.4
decay_fraction = 0.5
decay_factor = 100.0
)";

}  // namespace

TEST_CASE("parser handles scalars, arrays, comments and nesting") {
  const auto j = config::parse(
      "top = 1\n"
      "[a]\n"
      "s = \"hi # not a comment\"  # trailing comment\n"
      "flag = true\n"
      "pi = 3.5\n"
      "xs = [1, 2.5, \"three\"]\n"
      "[a.b]\n"
      "k = -7\n");
  CHECK(j.at("top").get<long>() == 1);
  CHECK(j.at("a").at("s").get<std::string>() == "hi # not a comment");
  CHECK(j.at("a").at("flag").get<bool>() == true);
  CHECK(j.at("a").at("pi").get<double>() == 3.5);
  CHECK(j.at("a").at("xs").size() == 3);
  CHECK(j.at("a").at("xs")[2].get<std::string>() == "three");
  CHECK(j.at("a").at("b").at("k").get<long>() == -7);
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS_AS(config::parse("[oops\nk = 1\n"), config::ParseError);
  CHECK_THROWS_AS(config::parse("no equals sign\n"), config::ParseError);
  CHECK_THROWS_AS(config::parse("k = \n"), config::ParseError);
  CHECK_THROWS_AS(config::parse("k = 1\nk = 2\n"), config::ParseError);
  CHECK_THROWS_AS(config::parse("k = 12abc\n"), config::ParseError);
  CHECK_THROWS_AS(config::parse("k = \"unterminated\n"), config::ParseError);
}

TEST_CASE("serialize then parse is the identity on parsed configs") {
  const auto j = config::parse(kSampleConfig);
  const std::string text = config::serialize(j);
  const auto j2 = config::parse(text);
  CHECK(j2 == j);
  // And serialization is deterministic.
  CHECK(config::serialize(j2) == text);
}

TEST_CASE("experiment config extraction") {
  const auto cfg = config::experiment_from_json(config::parse(kSampleConfig));
  config::validate(cfg);
  CHECK(cfg.name == "demo");
  CHECK(cfg.iterations == 500);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(cfg.dataset.kind == "sparse_regression");
  CHECK(cfg.dataset.test_n == 10);
  CHECK(cfg.model.arch == "diagonal_linear");
  REQUIRE(cfg.runs.size() == 2);
  // Runs come back in key order: large50 before small.
  CHECK(cfg.runs[0].name == "large50");
  CHECK(cfg.runs[0].schedule.kind == ScheduleKind::Piecewise);
  CHECK(cfg.runs[0].schedule.decay_fraction == 0.5);
  CHECK(cfg.runs[0].schedule.horizon == 500);
  CHECK(cfg.runs[1].name == "small");
  CHECK(cfg.runs[1].schedule.kind == ScheduleKind::Constant);
}

TEST_CASE("experiment round-trip through json and text") {
  const auto cfg = config::experiment_from_json(config::parse(kSampleConfig));
  const auto j = config::experiment_to_json(cfg);
  const auto cfg2 = config::experiment_from_json(config::parse(config::serialize(j)));
  CHECK(cfg2.name == cfg.name);
  CHECK(cfg2.iterations == cfg.iterations);
  CHECK(cfg2.seeds == cfg.seeds);
  CHECK(cfg2.runs.size() == cfg.runs.size());
  for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
    CHECK(cfg2.runs[i].name == cfg.runs[i].name);
    CHECK(cfg2.runs[i].schedule.kind == cfg.runs[i].schedule.kind);
    CHECK(cfg2.runs[i].schedule.eta0 == cfg.runs[i].schedule.eta0);
    CHECK(cfg2.runs[i].schedule.decay_fraction == cfg.runs[i].schedule.decay_fraction);
  }
}

TEST_CASE("validation failures") {
  auto base = config::experiment_from_json(config::parse(kSampleConfig));
  auto cfg = base;
  cfg.seeds.clear();
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);
  cfg = base;
  cfg.runs.clear();
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);
  cfg = base;
  cfg.dataset.kind = "cifar10";
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);
  cfg = base;
  cfg.runs[0].optimizer = "adam";
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);
  cfg = base;
  cfg.runs[0].schedule.eta0 = 0.0;
  CHECK_THROWS_AS(config::validate(cfg), std::invalid_argument);
}

TEST_CASE("materialization produces runnable configs") {
  const auto cfg = config::experiment_from_json(config::parse(kSampleConfig));
  const RunConfig rc = config::make_run_config(cfg, cfg.runs[1], 7);
  CHECK(rc.train.size() == 20);
  CHECK(rc.train.dim() == 40);
  REQUIRE(rc.test.has_value());
  CHECK(rc.test->size() == 10);
  REQUIRE(rc.rank_probe.has_value());
  CHECK(rc.rank_probe->rows == 80);  // parameter count of the d=40 model
  CHECK(rc.init.arch == Arch::DiagonalLinear);
  CHECK(rc.schedule.kind == ScheduleKind::Constant);
  // Deterministic in the seed.
  const RunConfig rc2 = config::make_run_config(cfg, cfg.runs[1], 7);
  CHECK(rc2.train.X.data == rc.train.X.data);
  CHECK(rc2.init.theta == rc.init.theta);
  const TrajectoryLog log = run(rc, OptimizerKind::Sgd);
  CHECK(log.final_record().iteration == 500);
}

TEST_CASE("bundled configs parse, validate and match their presets") {
  const std::string dir = std::string(SGDLAB_SOURCE_DIR) + "/configs";
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".toml") continue;
    ++count;
    const auto cfg = config::load_experiment(entry.path().string());
    CHECK(!cfg.name.empty());
  }
  CHECK(count >= 6);
}
