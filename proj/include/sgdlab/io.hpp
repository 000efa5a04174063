#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgdlab/dataset.hpp"
#include "sgdlab/model.hpp"
#include "sgdlab/trajectory.hpp"

namespace sgdlab {

// ---------------------------------------------------------------------------
// Checkpoints: one JSON header line (arch, shapes, seed, iteration, the flat
// slice layout description), then raw little-endian 64-bit floats for theta.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_doubles_le(std::ostream& os, const std::vector<double>& v) {
  static_assert(sizeof(double) == 8);
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(buf, 8);
  }
}

inline std::vector<double> read_doubles_le(std::istream& is, std::size_t count) {
  std::vector<double> v(count);
  for (auto& d : v) {
    char buf[8];
    is.read(buf, 8);
    if (!is) throw std::runtime_error("checkpoint: truncated parameter block");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    std::memcpy(&d, &bits, 8);
  }
  return v;
}

inline const char* slice_layout(const ModelState& m) {
  switch (m.arch) {
    case Arch::DiagonalLinear: return "u(d), v(d)";
    case Arch::TwoLayerRelu:
      return m.bias ? "a(m), W(m x d), b(m), c" : "a(m), W(m x d)";
    case Arch::ThreeLayerRelu:
      return m.bias ? "a(m2), W2(m2 x m1), W1(m1 x d), b2(m2), b1(m1), c"
                    : "a(m2), W2(m2 x m1), W1(m1 x d)";
    case Arch::Quadratic1D: return "theta";
  }
  return "?";
}

}  // namespace detail

inline void save_checkpoint(const ModelState& m, std::uint64_t seed, long iteration,
                            std::ostream& os) {
  nlohmann::json j;
  j["arch"] = arch_name(m.arch);
  j["input_dim"] = m.input_dim;
  j["widths"] = m.widths;
  j["bias"] = m.bias;
  j["param_count"] = m.param_count();
  j["layout"] = detail::slice_layout(m);
  j["seed"] = seed;
  j["iteration"] = iteration;
  os << j.dump() << "\n";
  detail::write_doubles_le(os, m.theta);
}

inline void save_checkpoint(const ModelState& m, std::uint64_t seed, long iteration,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  save_checkpoint(m, seed, iteration, os);
}

inline ModelState load_checkpoint(std::istream& is, std::uint64_t* seed = nullptr,
                                  long* iteration = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("checkpoint: missing header");
  const nlohmann::json j = nlohmann::json::parse(line);
  ModelState m;
  m.arch = arch_from_name(j.at("arch").get<std::string>());
  m.input_dim = j.at("input_dim").get<int>();
  m.widths = j.at("widths").get<std::vector<int>>();
  m.bias = j.at("bias").get<bool>();
  m.theta = detail::read_doubles_le(is, j.at("param_count").get<std::size_t>());
  if (seed) *seed = j.at("seed").get<std::uint64_t>();
  if (iteration) *iteration = j.at("iteration").get<long>();
  return m;
}

inline ModelState load_checkpoint(const std::string& path, std::uint64_t* seed = nullptr,
                                  long* iteration = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return load_checkpoint(is, seed, iteration);
}

// ---------------------------------------------------------------------------
// Datasets: CSV with header row (x_0..x_{d-1}, y) plus a JSON sidecar for the
// sampling law and the ground truth.
// ---------------------------------------------------------------------------

inline void save_dataset_csv(const Dataset& ds, std::ostream& os) {
  for (std::size_t j = 0; j < ds.X.cols; ++j) os << "x_" << j << ",";
  os << "y\n";
  for (std::size_t i = 0; i < ds.X.rows; ++i) {
    for (std::size_t j = 0; j < ds.X.cols; ++j)
      os << detail::fmt_double(ds.X(i, j)) << ",";
    os << detail::fmt_double(ds.y[i]) << "\n";
  }
}

inline nlohmann::json dataset_sidecar(const Dataset& ds) {
  nlohmann::json j;
  j["n"] = ds.X.rows;
  j["d"] = ds.X.cols;
  switch (ds.law) {
    case InputLaw::StandardNormal: j["law"] = "standard_normal"; break;
    case InputLaw::UniformInterval:
      j["law"] = "uniform";
      j["law_lo"] = ds.law_lo;
      j["law_hi"] = ds.law_hi;
      break;
    case InputLaw::Fixed: j["law"] = "fixed"; break;
  }
  if (ds.beta_star) j["beta_star"] = *ds.beta_star;
  if (ds.theta_star) j["theta_star"] = *ds.theta_star;
  if (ds.teacher) {
    // Stored as JSON (not the binary checkpoint block): the sidecar must stay
    // valid UTF-8. %.17g-equivalent round-trip is preserved by the serializer.
    j["teacher"] = {{"arch", arch_name(ds.teacher->arch)},
                    {"input_dim", ds.teacher->input_dim},
                    {"widths", ds.teacher->widths},
                    {"bias", ds.teacher->bias},
                    {"theta", ds.teacher->theta}};
  }
  return j;
}

inline void save_dataset(const Dataset& ds, const std::string& csv_path,
                         const std::string& sidecar_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  save_dataset_csv(ds, csv);
  std::ofstream side(sidecar_path);
  if (!side) throw std::runtime_error("cannot open " + sidecar_path);
  side << dataset_sidecar(ds).dump(2) << "\n";
}

inline Dataset load_dataset(const std::string& csv_path,
                            const std::string& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) throw std::runtime_error("cannot open " + sidecar_path);
  nlohmann::json j;
  side >> j;
  Dataset ds;
  const std::size_t n = j.at("n").get<std::size_t>();
  const std::size_t d = j.at("d").get<std::size_t>();
  const std::string law = j.at("law").get<std::string>();
  if (law == "standard_normal") ds.law = InputLaw::StandardNormal;
  else if (law == "uniform") {
    ds.law = InputLaw::UniformInterval;
    ds.law_lo = j.at("law_lo").get<double>();
    ds.law_hi = j.at("law_hi").get<double>();
  } else ds.law = InputLaw::Fixed;
  if (j.contains("beta_star")) ds.beta_star = j["beta_star"].get<std::vector<double>>();
  if (j.contains("theta_star")) ds.theta_star = j["theta_star"].get<double>();
  if (j.contains("teacher")) {
    const auto& t = j["teacher"];
    ModelState teacher;
    teacher.arch = arch_from_name(t.at("arch").get<std::string>());
    teacher.input_dim = t.at("input_dim").get<int>();
    teacher.widths = t.at("widths").get<std::vector<int>>();
    teacher.bias = t.at("bias").get<bool>();
    teacher.theta = t.at("theta").get<std::vector<double>>();
    ds.teacher = std::move(teacher);
  }

  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("dataset csv: empty");
  ds.X = Matrix(n, d);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(csv, line)) throw std::runtime_error("dataset csv: truncated");
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t jj = 0; jj < d; ++jj) {
      std::getline(ls, cell, ',');
      ds.X(i, jj) = std::stod(cell);
    }
    std::getline(ls, cell, ',');
    ds.y[i] = std::stod(cell);
  }
  return ds;
}

}  // namespace sgdlab
