#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "sgdlab/io.hpp"
#include "sgdlab/runner.hpp"

using namespace sgdlab;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "sgdlab_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("checkpoint round-trip for every architecture") {
  RngStream rng(3);
  std::vector<ModelState> models;
  models.push_back(make_diagonal_linear(7));
  models.push_back(make_two_layer_relu(4, 6, true, 1.0, rng));
  models.push_back(make_three_layer_relu(3, 5, 4, false, 1.0, rng));
  models.push_back(make_quadratic_1d(0.37));
  for (auto& m : models)
    for (auto& t : m.theta) t = rng.gaussian();

  for (const auto& m : models) {
    std::stringstream buf;
    save_checkpoint(m, 42, 1234, buf);
    std::uint64_t seed = 0;
    long iteration = 0;
    const ModelState back = load_checkpoint(buf, &seed, &iteration);
    CHECK(back.arch == m.arch);
    CHECK(back.input_dim == m.input_dim);
    CHECK(back.widths == m.widths);
    CHECK(back.bias == m.bias);
    CHECK(back.theta == m.theta);  // bit-exact through the binary block
    CHECK(seed == 42);
    CHECK(iteration == 1234);
  }
}

TEST_CASE("checkpoint file round-trip and truncation error") {
  RngStream rng(5);
  ModelState m = make_two_layer_relu(3, 4, false, 1.0, rng);
  const auto path = (temp_dir() / "model.ckpt").string();
  save_checkpoint(m, 7, 99, path);
  const ModelState back = load_checkpoint(path);
  CHECK(back.theta == m.theta);

  std::stringstream buf;
  save_checkpoint(m, 7, 99, buf);
  std::string content = buf.str();
  content.resize(content.size() - 5);
  std::stringstream cut(content);
  CHECK_THROWS_AS(load_checkpoint(cut), std::runtime_error);
}

TEST_CASE("special float values survive the checkpoint") {
  ModelState m = make_diagonal_linear(2);
  m.theta = {0.1 + 0.2, -0.0, 1e-308, 123456.78901234567};
  std::stringstream buf;
  save_checkpoint(m, 0, 0, buf);
  const ModelState back = load_checkpoint(buf);
  CHECK(back.theta == m.theta);
  CHECK(std::signbit(back.theta[1]));
}

TEST_CASE("dataset round-trip with sparse ground truth") {
  const Dataset ds = sparse_regression(11, 15, 25, 6);
  const auto csv = (temp_dir() / "sparse.csv").string();
  const auto side = (temp_dir() / "sparse.json").string();
  save_dataset(ds, csv, side);
  const Dataset back = load_dataset(csv, side);
  CHECK(back.X.rows == ds.X.rows);
  CHECK(back.X.cols == ds.X.cols);
  CHECK(back.X.data == ds.X.data);  // %.17g preserves doubles exactly
  CHECK(back.y == ds.y);
  CHECK(back.law == InputLaw::StandardNormal);
  REQUIRE(back.beta_star.has_value());
  CHECK(*back.beta_star == *ds.beta_star);
}

TEST_CASE("dataset round-trip with embedded teacher") {
  auto [ds, student] = teacher_student(13, 3, 2, 8, 20, 4);
  const auto csv = (temp_dir() / "teacher.csv").string();
  const auto side = (temp_dir() / "teacher.json").string();
  save_dataset(ds, csv, side);
  const Dataset back = load_dataset(csv, side);
  REQUIRE(back.teacher.has_value());
  CHECK(back.teacher->theta == ds.teacher->theta);
  CHECK(back.y == ds.y);
  // Reloaded teacher regenerates the labels exactly.
  for (std::size_t i = 0; i < back.X.rows; ++i)
    CHECK(predict(*back.teacher, back.X.row(i)) == back.y[i]);
}

TEST_CASE("dataset round-trip keeps the uniform law bounds") {
  const Dataset ds = quadratic_1d(17, 9, 0.8, 1.2, 1.4);
  const auto csv = (temp_dir() / "quad.csv").string();
  const auto side = (temp_dir() / "quad.json").string();
  save_dataset(ds, csv, side);
  const Dataset back = load_dataset(csv, side);
  CHECK(back.law == InputLaw::UniformInterval);
  CHECK(back.law_lo == 0.8);
  CHECK(back.law_hi == 1.2);
  REQUIRE(back.theta_star.has_value());
  CHECK(*back.theta_star == 1.4);
}

TEST_CASE("trajectory csv round-trip") {
  RunConfig cfg;
  cfg.train = sparse_regression(19, 6, 8, 2);
  cfg.test = fresh_like(cfg.train, 20, 10);
  cfg.init = make_diagonal_linear(8);
  cfg.schedule = constant_schedule(0.05, 100);
  cfg.cadence = 10;
  cfg.rank_cadence = 50;
  const TrajectoryLog log = run(cfg, OptimizerKind::Sgd);
  std::stringstream buf;
  write_csv(log, buf);
  const TrajectoryLog back = read_csv(buf);
  REQUIRE(back.records.size() == log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& a = log.records[i];
    const auto& b = back.records[i];
    CHECK(a.iteration == b.iteration);
    CHECK(a.step_size == b.step_size);
    CHECK(a.train_loss == b.train_loss);
    CHECK(a.test_loss == b.test_loss);
    CHECK(a.jacobian_rank == b.jacobian_rank);
    CHECK(a.l0_beta == b.l0_beta);
    CHECK(a.max_col_norm == b.max_col_norm);
  }
  std::stringstream bad("not,the,expected,header\n");
  CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
}

TEST_CASE("save_log writes csv plus header json") {
  RunConfig cfg;
  cfg.train = sparse_regression(23, 5, 6, 2);
  cfg.init = make_diagonal_linear(6);
  cfg.schedule = constant_schedule(0.05, 50);
  cfg.cadence = 10;
  const TrajectoryLog log = run(cfg, OptimizerKind::Sgd);
  const auto csv = (temp_dir() / "run.csv").string();
  const auto hdr = (temp_dir() / "run.json").string();
  save_log(log, csv, hdr);
  std::ifstream hs(hdr);
  nlohmann::json j;
  hs >> j;
  CHECK(j.at("optimizer").get<std::string>() == "sgd");
  CHECK(j.at("diverged").get<bool>() == false);
  CHECK(j.at("thresholds").at("rank_tau").get<double>() == 1e-3);
  std::ifstream cs(csv);
  const TrajectoryLog back = read_csv(cs);
  CHECK(back.records.size() == log.records.size());
}

TEST_CASE("default snapshot grid") {
  const auto s = default_snapshots(1000);
  CHECK(s.front() == 0);
  CHECK(s.back() == 1000);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  for (long g = 1; g < 1000; g *= 2)
    CHECK(std::binary_search(s.begin(), s.end(), g));
  CHECK(std::binary_search(s.begin(), s.end(), 500));
}
