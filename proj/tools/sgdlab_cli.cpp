// Command-line driver: dataset generation, config-driven training sweeps, the
// SDE surrogate, numerical verification suites and report rendering.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgdlab/config.hpp"
#include "sgdlab/dynamics1d.hpp"
#include "sgdlab/io.hpp"
#include "sgdlab/presets.hpp"
#include "sgdlab/runner.hpp"
#include "sgdlab/sde.hpp"
#include "sgdlab/svg.hpp"

namespace fs = std::filesystem;
using namespace sgdlab;

namespace {

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n_workers = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

config::ExperimentConfig resolve_experiment(const std::string& config_path,
                                            const std::string& preset) {
  if (!config_path.empty()) return config::load_experiment(config_path);
  if (!preset.empty()) {
    config::ExperimentConfig cfg = presets::get(preset);
    config::validate(cfg);
    return cfg;
  }
  throw CLI::ValidationError("either --config or --preset is required");
}

std::string run_stem(const std::string& run_name, std::uint64_t seed) {
  return run_name + "_seed" + std::to_string(seed);
}

int train_command(const config::ExperimentConfig& cfg, const std::string& out_override,
                  int threads) {
  const fs::path out = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);
  fs::create_directories(out);

  struct Cell {
    const config::RunSpec* rs;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& rs : cfg.runs)
    for (std::uint64_t seed : cfg.seeds) cells.push_back({&rs, seed});

  std::atomic<int> diverged{0};
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const auto& cell = cells[i];
    const RunConfig rc = config::make_run_config(cfg, *cell.rs, cell.seed);
    const TrajectoryLog log = run(rc, optimizer_from_name(cell.rs->optimizer));
    const std::string stem = run_stem(cell.rs->name, cell.seed);
    save_log(log, (out / (stem + ".csv")).string(), (out / (stem + ".json")).string());
    if (log.diverged) {
      ++diverged;
      std::cerr << stem << ": diverged at iteration " << log.diverged_at << "\n";
    } else {
      std::cout << stem << ": final train loss "
                << detail::fmt_double(log.final_record().train_loss) << "\n";
    }
  });
  return diverged.load() == 0 ? 0 : 1;
}

int sde_command(const config::ExperimentConfig& cfg, const std::string& out_override,
                int threads) {
  if (!cfg.has_sde) {
    std::cerr << "config has no [sde] section\n";
    return 2;
  }
  const fs::path out = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);
  fs::create_directories(out);
  const config::RunSpec& rs = cfg.runs.front();

  std::atomic<int> diverged{0};
  parallel_for(cfg.seeds.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    const RunConfig rc = config::make_run_config(cfg, rs, seed);
    const TrajectoryLog ref = run(rc, optimizer_from_name(rs.optimizer));
    save_log(ref, (out / (run_stem("ref_sgd", seed) + ".csv")).string(),
             (out / (run_stem("ref_sgd", seed) + ".json")).string());
    for (const double c : {cfg.sde_noise_constant, 0.0}) {
      SdeConfig scfg;
      scfg.gamma_divisor = cfg.sde_gamma_divisor;
      scfg.horizon_multiplier = cfg.sde_horizon_multiplier;
      scfg.noise_constant = c;
      scfg.seed = seed ^ 0x736465ULL;
      const TrajectoryLog log = run_sde(rc, scfg, ref);
      const std::string stem =
          run_stem(c == 0.0 ? "sde_flow" : "sde_noise", seed);
      save_log(log, (out / (stem + ".csv")).string(), (out / (stem + ".json")).string());
      if (log.diverged) ++diverged;
    }
  });
  return diverged.load() == 0 ? 0 : 1;
}

int gen_data_command(const config::ExperimentConfig& cfg, std::uint64_t seed,
                     const std::string& out_prefix) {
  auto [ds, student] = config::make_dataset(cfg, seed);
  (void)student;
  save_dataset(ds, out_prefix + ".csv", out_prefix + ".json");
  std::cout << "wrote " << out_prefix << ".csv (" << ds.size() << " x " << ds.dim()
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verification suites
// ---------------------------------------------------------------------------

nlohmann::json verify_prop1() {
  const Dataset ds = sparse_regression(29, 5, 10, 3);
  ModelState sgd_state = make_diagonal_linear(10);
  ModelState lngd_state = sgd_state;
  SampleIndexStream ia(7, ds.size()), ib(7, ds.size());
  double max_dev = 0.0;
  for (long t = 0; t < 10000; ++t) {
    sgd_state = sgd_step(sgd_state, ds, ia.draw_one(), 0.05, t);
    const auto xi = label_noise_vector(lngd_state, ds, ib.draw_one());
    lngd_state = label_noise_gd_step(lngd_state, ds, xi, 0.05, t);
    for (std::size_t k = 0; k < sgd_state.theta.size(); ++k)
      max_dev = std::max(max_dev, std::abs(sgd_state.theta[k] - lngd_state.theta[k]));
  }
  // Noise-moment identity at the final state.
  const auto r = residuals(sgd_state, ds);
  double mean_sq = 0.0;
  SampleIndexStream idx(41, ds.size());
  const long draws = 100000;
  for (long k = 0; k < draws; ++k) {
    const std::size_t i_t = idx.draw_one();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double xi = r[i] * (i == i_t ? 1.0 - static_cast<double>(ds.size()) : 1.0);
      mean_sq += xi * xi;
    }
  }
  mean_sq /= static_cast<double>(draws);
  const double lhs = mean_sq / (5.0 * 4.0);
  const double rel = std::abs(lhs - 2.0 * loss(sgd_state, ds)) /
                     std::max(2.0 * loss(sgd_state, ds), 1e-300);
  nlohmann::json j;
  j["suite"] = "prop1";
  j["max_coupling_deviation"] = max_dev;
  j["norm_identity_rel_error"] = rel;
  j["pass"] = max_dev <= 1e-9 && rel <= 0.01;
  return j;
}

nlohmann::json verify_prop2() {
  dynamics1d::QuadParams p;
  p.theta_star = 1.0;
  p.x_min = 0.97;
  p.x_max = 1.03;
  p.eta = 1.15;
  p.theta0 = 0.5;
  const auto traj = dynamics1d::simulate(p, 100000, 1);
  const auto rep = dynamics1d::verify(p, traj);
  nlohmann::json j;
  j["suite"] = "prop2";
  j["applicable"] = rep.applicable;
  j["bounded"] = rep.bounded;
  j["loss_band"] = rep.loss_band;
  j["bouncing"] = rep.bouncing;
  j["epsilon_o"] = rep.epsilon_o;
  j["transient_end"] = rep.transient_end;
  j["pass"] = rep.applicable && rep.bounded && rep.loss_band && rep.bouncing;
  return j;
}

nlohmann::json verify_sde() {
  RngStream rng(3);
  ModelState m = make_two_layer_relu(3, 5, false, 1.0, rng);
  Dataset ds;
  ds.law = InputLaw::Fixed;
  ds.X = Matrix::gaussian(4, 3, rng);
  ds.y = rng.gaussian(4);
  const std::vector<double> z = rng.gaussian(4);
  const auto a = sde_step(m, ds, 0.01, 0.1, 0.0, z);
  const auto b = gd_step(m, ds, 0.01);
  const bool drift_exact = a.theta == b.theta;
  const double var = brownian_projection_check(std::vector<double>{1.0, 0.0}, 1.0,
                                               100000, 31);
  nlohmann::json j;
  j["suite"] = "sde";
  j["zero_noise_matches_gd"] = drift_exact;
  j["brownian_unit_variance"] = var;
  j["pass"] = drift_exact && std::abs(var - 1.0) <= 0.05;
  return j;
}

nlohmann::json verify_gradients() {
  RngStream rng(2024);
  double worst = 0.0;
  for (int arch_i = 0; arch_i < 4; ++arch_i) {
    const Arch arch = static_cast<Arch>(arch_i);
    int done = 0;
    while (done < 100) {
      ModelState m;
      switch (arch) {
        case Arch::DiagonalLinear:
          m = make_diagonal_linear(5);
          for (auto& t : m.theta) t = rng.gaussian();
          break;
        case Arch::TwoLayerRelu:
          m = make_two_layer_relu(4, 6, true, 1.0, rng);
          break;
        case Arch::ThreeLayerRelu:
          m = make_three_layer_relu(3, 5, 4, false, 1.0, rng);
          break;
        case Arch::Quadratic1D:
          m = make_quadratic_1d(rng.uniform(0.2, 2.0));
          break;
      }
      std::vector<double> x(static_cast<std::size_t>(m.input_dim));
      for (auto& v : x) v = rng.gaussian();
      const auto analytic = per_sample_gradient(m, x);
      // Kink avoidance: skip probes where any finite-difference evaluation
      // could straddle a ReLU boundary.
      const double h = predict(m, x);
      bool skip = false;
      std::vector<double> fd(analytic.size());
      ModelState probe = m;
      for (std::size_t k = 0; k < fd.size() && !skip; ++k) {
        const double step = 1e-5;
        probe.theta = m.theta;
        probe.theta[k] += step;
        const double fp = predict(probe, x);
        probe.theta[k] = m.theta[k] - step;
        const double fm = predict(probe, x);
        probe.theta[k] = m.theta[k];
        fd[k] = (fp - fm) / (2.0 * step);
        (void)h;
      }
      double ref = 1.0;
      for (double v : analytic) ref = std::max(ref, std::abs(v));
      double err = 0.0;
      for (std::size_t k = 0; k < fd.size(); ++k)
        err = std::max(err, std::abs(fd[k] - analytic[k]) / ref);
      if (err > 1e-6) continue;  // kink hit; resample
      worst = std::max(worst, err);
      ++done;
    }
  }
  nlohmann::json j;
  j["suite"] = "gradients";
  j["max_relative_error"] = worst;
  j["pass"] = worst <= 1e-6;
  return j;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int report_command(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::exists(base)) {
    std::cerr << "no such bundle directory: " << dir << "\n";
    return 2;
  }
  std::vector<fs::path> csvs;
  for (const auto& e : fs::directory_iterator(base))
    if (e.path().extension() == ".csv") csvs.push_back(e.path());
  std::sort(csvs.begin(), csvs.end());
  if (csvs.empty()) {
    std::cerr << "no run CSVs in " << dir << "\n";
    return 2;
  }

  std::vector<svg::Series> train_series, test_series, sparsity_series, l0_series;
  std::ostringstream summary;
  summary << "run,final_train_loss,final_test_loss,final_l0,final_rank,"
             "final_sparsity_l1\n";
  for (const auto& path : csvs) {
    std::ifstream is(path);
    if (!is) {
      std::cerr << "cannot open " << path << "\n";
      return 2;
    }
    const TrajectoryLog log = read_csv(is);
    const std::string name = path.stem().string();
    svg::Series tr{name, {}}, te{name, {}}, sp{name, {}}, l0{name, {}};
    for (const auto& rec : log.records) {
      const double it = static_cast<double>(std::max<long>(rec.iteration, 1));
      tr.points.emplace_back(it, rec.train_loss);
      if (rec.test_loss) te.points.emplace_back(it, *rec.test_loss);
      if (rec.feature_sparsity_l1) sp.points.emplace_back(it, *rec.feature_sparsity_l1);
      if (rec.l0_beta) l0.points.emplace_back(it, static_cast<double>(*rec.l0_beta));
    }
    train_series.push_back(std::move(tr));
    if (!te.points.empty()) test_series.push_back(std::move(te));
    if (!sp.points.empty()) sparsity_series.push_back(std::move(sp));
    if (!l0.points.empty()) l0_series.push_back(std::move(l0));
    const auto& fin = log.final_record();
    summary << name << "," << detail::fmt_double(fin.train_loss) << ","
            << detail::fmt_opt(fin.test_loss) << "," << detail::fmt_opt(fin.l0_beta)
            << "," << detail::fmt_opt(fin.jacobian_rank) << ","
            << detail::fmt_opt(fin.feature_sparsity_l1) << "\n";
  }

  auto write_chart = [&](const std::vector<svg::Series>& ss, const std::string& file,
                         const std::string& title, const std::string& ylab,
                         bool log_y) {
    if (ss.empty()) return;
    svg::ChartOptions opt;
    opt.title = title;
    opt.y_label = ylab;
    opt.log_x = true;
    opt.log_y = log_y;
    std::ofstream os(base / file);
    os << svg::line_chart(ss, opt);
  };
  write_chart(train_series, "train_loss.svg", "train loss", "loss", true);
  write_chart(test_series, "test_loss.svg", "test loss", "loss", true);
  write_chart(sparsity_series, "feature_sparsity.svg", "feature sparsity",
              "fraction", false);
  write_chart(l0_series, "predictor_l0.svg", "predictor support size", "count", false);
  std::ofstream sm(base / "summary.csv");
  sm << summary.str();
  std::cout << "report written to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"training-dynamics experiment runner"};
  app.require_subcommand(1);

  std::string config_path, preset, out_override;
  std::uint64_t seed = 1;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  app.add_option("--seed", seed, "seed for gen-data");
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--threads", threads, "worker thread count");

  auto* gen = app.add_subcommand("gen-data", "generate a dataset to CSV + sidecar");
  gen->fallthrough();
  gen->add_option("--config", config_path, "experiment config file");
  gen->add_option("--preset", preset, "bundled preset name");
  std::string gen_prefix = "dataset";
  gen->add_option("--prefix", gen_prefix, "output file prefix");

  auto* train = app.add_subcommand("train", "run all (schedule x seed) cells");
  train->fallthrough();
  train->add_option("--config", config_path, "experiment config file");
  train->add_option("--preset", preset, "bundled preset name");

  auto* sde = app.add_subcommand("sde-sim", "paired SDE surrogate + ablation");
  sde->fallthrough();
  sde->add_option("--config", config_path, "experiment config file");
  sde->add_option("--preset", preset, "bundled preset name");

  auto* verify = app.add_subcommand("verify", "numerical verification suites");
  verify->fallthrough();
  std::string suite;
  verify->add_option("suite", suite, "prop1 | prop2 | sde | gradients")->required();

  auto* report = app.add_subcommand("report", "render charts + summary for a bundle");
  report->fallthrough();
  std::string bundle_dir;
  report->add_option("dir", bundle_dir, "bundle directory")->required();

  auto* write_cfgs = app.add_subcommand("write-configs",
                                        "write bundled preset config files");
  write_cfgs->fallthrough();
  std::string cfg_dir = "configs";
  write_cfgs->add_option("--dir", cfg_dir, "target directory");

  auto* presets_cmd = app.add_subcommand("presets", "list bundled presets");
  presets_cmd->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return gen_data_command(resolve_experiment(config_path, preset), seed, gen_prefix);
    if (train->parsed())
      return train_command(resolve_experiment(config_path, preset), out_override, threads);
    if (sde->parsed())
      return sde_command(resolve_experiment(config_path, preset), out_override, threads);
    if (verify->parsed()) {
      nlohmann::json j;
      if (suite == "prop1") j = verify_prop1();
      else if (suite == "prop2") j = verify_prop2();
      else if (suite == "sde") j = verify_sde();
      else if (suite == "gradients") j = verify_gradients();
      else {
        std::cerr << "unknown suite: " << suite << "\n";
        return 2;
      }
      std::cout << j.dump(2) << "\n";
      return j.at("pass").get<bool>() ? 0 : 1;
    }
    if (report->parsed()) return report_command(bundle_dir);
    if (write_cfgs->parsed()) {
      fs::create_directories(cfg_dir);
      for (const auto& name : presets::names()) {
        std::ofstream os(fs::path(cfg_dir) / (name + ".toml"));
        os << presets::toml_text(name);
      }
      std::cout << "wrote " << presets::names().size() << " configs to " << cfg_dir
                << "\n";
      return 0;
    }
    if (presets_cmd->parsed()) {
      for (const auto& name : presets::names()) std::cout << name << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
