#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdlab/dataset.hpp"
#include "sgdlab/metrics.hpp"
#include "sgdlab/model.hpp"
#include "sgdlab/runner.hpp"
#include "sgdlab/schedule.hpp"

namespace sgdlab {
namespace config {

// ---------------------------------------------------------------------------
// Minimal TOML-style reader: [section] and [nested.section] headers, key =
// value pairs, # comments, strings, bools, numbers and flat arrays. Enough for
// the bundled experiment files; not a general TOML implementation.
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what) {}
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Drop a trailing comment, respecting quoted strings.
inline std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

inline nlohmann::json parse_scalar(const std::string& raw, int line) {
  const std::string v = strip(raw);
  if (v.empty()) throw ParseError(line, "empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ParseError(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        ++i;
        switch (v[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: throw ParseError(line, "bad escape");
        }
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  const bool looks_float = v.find_first_of(".eE") != std::string::npos &&
                           v.find_first_not_of("+-0123456789.eE") == std::string::npos;
  try {
    std::size_t used = 0;
    if (looks_float) {
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } else {
      const long long i = std::stoll(v, &used);
      if (used == v.size()) return i;
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    }
  } catch (const std::exception&) {
  }
  throw ParseError(line, "cannot parse value: " + v);
}

inline nlohmann::json parse_value(const std::string& raw, int line) {
  const std::string v = strip(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ParseError(line, "unterminated array");
    nlohmann::json arr = nlohmann::json::array();
    std::string inner = v.substr(1, v.size() - 2);
    std::string cell;
    bool in_string = false;
    for (char c : inner) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        if (!strip(cell).empty()) arr.push_back(parse_scalar(cell, line));
        cell.clear();
      } else {
        cell += c;
      }
    }
    if (!strip(cell).empty()) arr.push_back(parse_scalar(cell, line));
    return arr;
  }
  return parse_scalar(v, line);
}

}  // namespace detail

inline nlohmann::json parse(std::istream& is) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = detail::strip(detail::strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(lineno, "unterminated section header");
      const std::string name = detail::strip(s.substr(1, s.size() - 2));
      if (name.empty()) throw ParseError(lineno, "empty section name");
      section = &root;
      std::string part;
      std::istringstream ps(name);
      while (std::getline(ps, part, '.')) {
        part = detail::strip(part);
        if (part.empty()) throw ParseError(lineno, "empty section path element");
        section = &(*section)[part];
        if (!section->is_object() && !section->is_null())
          throw ParseError(lineno, "section clashes with a value: " + name);
        if (section->is_null()) *section = nlohmann::json::object();
      }
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const std::string key = detail::strip(s.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (section->contains(key)) throw ParseError(lineno, "duplicate key: " + key);
    (*section)[key] = detail::parse_value(s.substr(eq + 1), lineno);
  }
  return root;
}

inline nlohmann::json parse(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

inline nlohmann::json parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  return parse(is);
}

namespace detail {

inline std::string serialize_scalar(const nlohmann::json& v) {
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : v.get<std::string>()) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    return out + "\"";
  }
  return v.dump();
}

inline void serialize_section(const nlohmann::json& obj, const std::string& prefix,
                              std::ostream& os) {
  // Scalars and arrays first, then subsections (so keys bind to this header).
  bool wrote_header = prefix.empty();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.value().is_object()) continue;
    if (!wrote_header) {
      os << "[" << prefix << "]\n";
      wrote_header = true;
    }
    if (it.value().is_array()) {
      os << it.key() << " = [";
      bool first = true;
      for (const auto& e : it.value()) {
        if (!first) os << ", ";
        os << serialize_scalar(e);
        first = false;
      }
      os << "]\n";
    } else {
      os << it.key() << " = " << serialize_scalar(it.value()) << "\n";
    }
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_object()) continue;
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().empty()) os << "[" << path << "]\n";
    serialize_section(it.value(), path, os);
  }
}

}  // namespace detail

/// Deterministic text form (keys in nlohmann's sorted order); parse(serialize(j))
/// reproduces j for configs in the supported subset.
inline std::string serialize(const nlohmann::json& root) {
  std::ostringstream os;
  detail::serialize_section(root, "", os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Experiment description: dataset + model + thresholds + one or more runs
// (schedule and optimizer each), executed over a seed list.
// ---------------------------------------------------------------------------

struct DatasetSpec {
  std::string kind;  // sparse_regression | regression_1d | teacher_student | quadratic_1d
  int n = 0, d = 0, r = 0;
  int depth = 3, teacher_width = 2, student_width = 10;
  double a = 0.0, b = 0.0, theta_star = 1.0;
  int test_n = 0;  // fresh test set size; 0 = no test set
};

struct ModelSpec {
  std::string arch;  // diagonal_linear | two_layer_relu | three_layer_relu | quadratic_1d
  int width = 0, width2 = 0;
  bool bias = false;
  double init_scale = 1.0;
  double u0 = 0.1, v0 = 0.0;  // diagonal linear init
  double theta0 = 0.5;        // quadratic_1d init
};

struct RunSpec {
  std::string name;
  std::string optimizer = "sgd";  // sgd | gd | label-noise-gd
  Schedule schedule;
};

struct ExperimentConfig {
  std::string name;
  long iterations = 0;
  std::vector<std::uint64_t> seeds;
  long cadence = 1;
  long rank_cadence = 0;
  int batch_size = 1;
  int rank_probe_n = 0;  // rows of the fresh rank probe; 0 = parameter count
  std::string out_dir = "out";
  DatasetSpec dataset;
  ModelSpec model;
  MetricThresholds thresholds;
  std::vector<RunSpec> runs;
  // SDE pairing (optional; used by sde-sim against the first run).
  bool has_sde = false;
  double sde_noise_constant = 1.0;
  double sde_gamma_divisor = 10.0;
  long sde_horizon_multiplier = 10;
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline Schedule schedule_from_json(const nlohmann::json& j, long horizon) {
  Schedule s;
  s.kind = schedule_kind_from_name(j.at("schedule").get<std::string>());
  s.eta0 = j.at("eta0").get<double>();
  s.eta_max = get_or<double>(j, "eta_max", s.eta0);
  s.decay_fraction = get_or<double>(j, "decay_fraction", 1.0);
  s.decay_factor = get_or<double>(j, "decay_factor", 1.0);
  s.warmup_exponent = get_or<double>(j, "warmup_exponent", 1.05);
  s.warmup_steps = get_or<long>(j, "warmup_steps", 0);
  s.horizon = horizon;
  return s;
}

inline nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json j;
  j["schedule"] = schedule_kind_name(s.kind);
  j["eta0"] = s.eta0;
  if (s.kind == ScheduleKind::LinearWarmup || s.kind == ScheduleKind::ExpWarmup)
    j["eta_max"] = s.eta_max;
  if (s.decay_fraction != 1.0) j["decay_fraction"] = s.decay_fraction;
  if (s.decay_factor != 1.0) j["decay_factor"] = s.decay_factor;
  if (s.kind == ScheduleKind::ExpWarmup) j["warmup_exponent"] = s.warmup_exponent;
  if (s.kind == ScheduleKind::LinearWarmup) j["warmup_steps"] = s.warmup_steps;
  return j;
}

}  // namespace detail

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  const auto& exp = j.at("experiment");
  cfg.name = exp.at("name").get<std::string>();
  cfg.iterations = exp.at("iterations").get<long>();
  cfg.seeds = exp.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.cadence = detail::get_or<long>(exp, "cadence", 1);
  cfg.rank_cadence = detail::get_or<long>(exp, "rank_cadence", 0);
  cfg.batch_size = detail::get_or<int>(exp, "batch_size", 1);
  cfg.rank_probe_n = detail::get_or<int>(exp, "rank_probe_n", 0);
  cfg.out_dir = detail::get_or<std::string>(exp, "out", "out");

  const auto& ds = j.at("dataset");
  cfg.dataset.kind = ds.at("kind").get<std::string>();
  cfg.dataset.n = detail::get_or<int>(ds, "n", 0);
  cfg.dataset.d = detail::get_or<int>(ds, "d", 0);
  cfg.dataset.r = detail::get_or<int>(ds, "r", 0);
  cfg.dataset.depth = detail::get_or<int>(ds, "depth", 3);
  cfg.dataset.teacher_width = detail::get_or<int>(ds, "teacher_width", 2);
  cfg.dataset.student_width = detail::get_or<int>(ds, "student_width", 10);
  cfg.dataset.a = detail::get_or<double>(ds, "a", 0.0);
  cfg.dataset.b = detail::get_or<double>(ds, "b", 0.0);
  cfg.dataset.theta_star = detail::get_or<double>(ds, "theta_star", 1.0);
  cfg.dataset.test_n = detail::get_or<int>(ds, "test_n", 0);

  const auto& mo = j.at("model");
  cfg.model.arch = mo.at("arch").get<std::string>();
  cfg.model.width = detail::get_or<int>(mo, "width", 0);
  cfg.model.width2 = detail::get_or<int>(mo, "width2", 0);
  cfg.model.bias = detail::get_or<bool>(mo, "bias", false);
  cfg.model.init_scale = detail::get_or<double>(mo, "init_scale", 1.0);
  cfg.model.u0 = detail::get_or<double>(mo, "u0", 0.1);
  cfg.model.v0 = detail::get_or<double>(mo, "v0", 0.0);
  cfg.model.theta0 = detail::get_or<double>(mo, "theta0", 0.5);

  if (j.contains("thresholds")) {
    const auto& th = j.at("thresholds");
    cfg.thresholds.rank_tau = detail::get_or<double>(th, "rank_tau", 1e-3);
    cfg.thresholds.corr_rho = detail::get_or<double>(th, "corr_rho", 0.95);
    cfg.thresholds.corr_absolute = detail::get_or<bool>(th, "corr_absolute", false);
    cfg.thresholds.active_eps = detail::get_or<double>(th, "active_eps", 1e-8);
    cfg.thresholds.l0_rel = detail::get_or<double>(th, "l0_rel", 1e-2);
  }

  if (j.contains("run")) {
    for (auto it = j.at("run").begin(); it != j.at("run").end(); ++it) {
      RunSpec rs;
      rs.name = it.key();
      rs.optimizer = detail::get_or<std::string>(it.value(), "optimizer", "sgd");
      rs.schedule = detail::schedule_from_json(it.value(), cfg.iterations);
      cfg.runs.push_back(std::move(rs));
    }
  }

  if (j.contains("sde")) {
    cfg.has_sde = true;
    const auto& sd = j.at("sde");
    cfg.sde_noise_constant = detail::get_or<double>(sd, "noise_constant", 1.0);
    cfg.sde_gamma_divisor = detail::get_or<double>(sd, "gamma_divisor", 10.0);
    cfg.sde_horizon_multiplier = detail::get_or<long>(sd, "horizon_multiplier", 10);
  }
  return cfg;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.name.empty()) throw std::invalid_argument("config: experiment.name required");
  if (cfg.iterations < 0) throw std::invalid_argument("config: iterations >= 0");
  if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  if (cfg.cadence < 1) throw std::invalid_argument("config: cadence >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
  if (cfg.runs.empty()) throw std::invalid_argument("config: at least one [run.*]");
  for (const auto& r : cfg.runs) {
    optimizer_from_name(r.optimizer);
    if (r.schedule.eta0 <= 0.0)
      throw std::invalid_argument("config: run " + r.name + ": eta0 > 0 required");
  }
  static const char* dataset_kinds[] = {"sparse_regression", "regression_1d",
                                        "teacher_student", "quadratic_1d"};
  bool ok = false;
  for (const char* k : dataset_kinds) ok = ok || cfg.dataset.kind == k;
  if (!ok) throw std::invalid_argument("config: unknown dataset kind: " + cfg.dataset.kind);
  arch_from_name(cfg.model.arch);
}

inline nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = {{"name", cfg.name},
                     {"iterations", cfg.iterations},
                     {"seeds", cfg.seeds},
                     {"cadence", cfg.cadence},
                     {"rank_cadence", cfg.rank_cadence},
                     {"batch_size", cfg.batch_size},
                     {"rank_probe_n", cfg.rank_probe_n},
                     {"out", cfg.out_dir}};
  nlohmann::json ds{{"kind", cfg.dataset.kind}};
  if (cfg.dataset.kind == "sparse_regression") {
    ds["n"] = cfg.dataset.n;
    ds["d"] = cfg.dataset.d;
    ds["r"] = cfg.dataset.r;
  } else if (cfg.dataset.kind == "teacher_student") {
    ds["n"] = cfg.dataset.n;
    ds["d"] = cfg.dataset.d;
    ds["depth"] = cfg.dataset.depth;
    ds["teacher_width"] = cfg.dataset.teacher_width;
    ds["student_width"] = cfg.dataset.student_width;
  } else if (cfg.dataset.kind == "quadratic_1d") {
    ds["n"] = cfg.dataset.n;
    ds["a"] = cfg.dataset.a;
    ds["b"] = cfg.dataset.b;
    ds["theta_star"] = cfg.dataset.theta_star;
  }
  if (cfg.dataset.test_n > 0) ds["test_n"] = cfg.dataset.test_n;
  j["dataset"] = ds;
  nlohmann::json mo{{"arch", cfg.model.arch}};
  if (cfg.model.arch == "two_layer_relu" || cfg.model.arch == "three_layer_relu") {
    mo["width"] = cfg.model.width;
    if (cfg.model.arch == "three_layer_relu") mo["width2"] = cfg.model.width2;
    mo["bias"] = cfg.model.bias;
    mo["init_scale"] = cfg.model.init_scale;
  } else if (cfg.model.arch == "diagonal_linear") {
    mo["u0"] = cfg.model.u0;
    mo["v0"] = cfg.model.v0;
  } else {
    mo["theta0"] = cfg.model.theta0;
  }
  j["model"] = mo;
  j["thresholds"] = {{"rank_tau", cfg.thresholds.rank_tau},
                     {"corr_rho", cfg.thresholds.corr_rho},
                     {"corr_absolute", cfg.thresholds.corr_absolute},
                     {"active_eps", cfg.thresholds.active_eps},
                     {"l0_rel", cfg.thresholds.l0_rel}};
  for (const auto& r : cfg.runs) {
    nlohmann::json rj = detail::schedule_to_json(r.schedule);
    rj["optimizer"] = r.optimizer;
    j["run"][r.name] = rj;
  }
  if (cfg.has_sde)
    j["sde"] = {{"noise_constant", cfg.sde_noise_constant},
                {"gamma_divisor", cfg.sde_gamma_divisor},
                {"horizon_multiplier", cfg.sde_horizon_multiplier}};
  return j;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  ExperimentConfig cfg = experiment_from_json(parse_file(path));
  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Materialization: turn the declarative specs into datasets, models and run
// configurations. The dataset/model seeds are derived from the run seed so
// that different seeds give independent instances.
// ---------------------------------------------------------------------------

/// Builds the training set and, for teacher-student, the paired student init.
inline std::pair<Dataset, std::optional<ModelState>> make_dataset(
    const ExperimentConfig& cfg, std::uint64_t seed) {
  const DatasetSpec& d = cfg.dataset;
  if (d.kind == "sparse_regression")
    return {sparse_regression(seed, d.n, d.d, d.r), std::nullopt};
  if (d.kind == "regression_1d") return {regression_1d(seed), std::nullopt};
  if (d.kind == "teacher_student") {
    auto [ds, student] = teacher_student(seed, d.depth, d.teacher_width,
                                         d.student_width, d.n, d.d,
                                         cfg.model.init_scale);
    return {std::move(ds), std::move(student)};
  }
  if (d.kind == "quadratic_1d")
    return {quadratic_1d(seed, d.n, d.a, d.b, d.theta_star), std::nullopt};
  throw std::invalid_argument("make_dataset: unknown kind " + d.kind);
}

inline ModelState make_model(const ExperimentConfig& cfg, const Dataset& ds,
                             std::uint64_t seed) {
  const ModelSpec& m = cfg.model;
  const int d = ds.dim();
  if (m.arch == "diagonal_linear") return make_diagonal_linear(d, m.u0, m.v0);
  RngStream rng(seed ^ 0x696e6974ULL);
  if (m.arch == "two_layer_relu")
    return make_two_layer_relu(d, m.width, m.bias, m.init_scale, rng);
  if (m.arch == "three_layer_relu")
    return make_three_layer_relu(d, m.width, m.width2 > 0 ? m.width2 : m.width,
                                 m.bias, m.init_scale, rng);
  if (m.arch == "quadratic_1d") return make_quadratic_1d(m.theta0);
  throw std::invalid_argument("make_model: unknown arch " + m.arch);
}

/// Assembles the full RunConfig for one (run, seed) cell.
inline RunConfig make_run_config(const ExperimentConfig& cfg, const RunSpec& rs,
                                 std::uint64_t seed) {
  RunConfig rc;
  auto [train, student] = make_dataset(cfg, seed);
  rc.train = std::move(train);
  if (student) {
    rc.init = std::move(*student);
  } else {
    rc.init = make_model(cfg, rc.train, seed);
  }
  if (cfg.dataset.test_n > 0)
    rc.test = fresh_like(rc.train, seed ^ 0x74657374ULL, cfg.dataset.test_n);
  if (cfg.rank_cadence > 0) {
    const int rows =
        cfg.rank_probe_n > 0 ? cfg.rank_probe_n : static_cast<int>(rc.init.param_count());
    rc.rank_probe = fresh_inputs(rc.train, seed ^ 0x70726f6265ULL, rows);
  }
  rc.schedule = rs.schedule;
  rc.seed = seed;
  rc.cadence = cfg.cadence;
  rc.rank_cadence = cfg.rank_cadence;
  rc.batch_size = cfg.batch_size;
  rc.thresholds = cfg.thresholds;
  return rc;
}

}  // namespace config
}  // namespace sgdlab
