#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sgdlab {

/// One logged point along a run. Optional fields are empty in the CSV where
/// the metric was not measured at that iteration.
struct MetricRecord {
  long iteration = 0;
  double step_size = 0.0;
  double train_loss = 0.0;
  std::optional<double> test_loss;
  std::optional<int> jacobian_rank;
  std::optional<double> feature_sparsity_l1;
  std::optional<double> feature_sparsity_l2;
  std::optional<int> l0_beta;
  std::optional<double> max_col_norm;
};

struct TrajectoryLog {
  nlohmann::json header;  // thresholds, schedule, seed, selected constants
  std::vector<MetricRecord> records;
  std::vector<std::pair<long, std::vector<double>>> snapshots;
  bool diverged = false;
  long diverged_at = -1;

  const MetricRecord& final_record() const {
    if (records.empty()) throw std::runtime_error("TrajectoryLog: empty");
    return records.back();
  }

  /// Last record with iteration <= t (records are appended in order).
  const MetricRecord& record_at_or_before(long t) const {
    if (records.empty()) throw std::runtime_error("TrajectoryLog: empty");
    const MetricRecord* best = &records.front();
    for (const auto& r : records) {
      if (r.iteration <= t) best = &r;
      else break;
    }
    return *best;
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
inline std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, int>) return std::to_string(*v);
  else return fmt_double(*v);
}

}  // namespace detail

inline const char* kTrajectoryCsvHeader =
    "iteration,step_size,train_loss,test_loss,jacobian_rank,"
    "feature_sparsity_l1,feature_sparsity_l2,l0_beta,max_col_norm";

inline void write_csv(const TrajectoryLog& log, std::ostream& os) {
  os << kTrajectoryCsvHeader << "\n";
  for (const auto& r : log.records) {
    os << r.iteration << ',' << detail::fmt_double(r.step_size) << ','
       << detail::fmt_double(r.train_loss) << ',' << detail::fmt_opt(r.test_loss)
       << ',' << detail::fmt_opt(r.jacobian_rank) << ','
       << detail::fmt_opt(r.feature_sparsity_l1) << ','
       << detail::fmt_opt(r.feature_sparsity_l2) << ','
       << detail::fmt_opt(r.l0_beta) << ',' << detail::fmt_opt(r.max_col_norm)
       << "\n";
  }
}

inline TrajectoryLog read_csv(std::istream& is) {
  TrajectoryLog log;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty file");
  if (line != kTrajectoryCsvHeader)
    throw std::runtime_error("read_csv: unexpected header: " + line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    cells.resize(9);
    MetricRecord r;
    r.iteration = std::stol(cells[0]);
    r.step_size = std::stod(cells[1]);
    r.train_loss = std::stod(cells[2]);
    if (!cells[3].empty()) r.test_loss = std::stod(cells[3]);
    if (!cells[4].empty()) r.jacobian_rank = std::stoi(cells[4]);
    if (!cells[5].empty()) r.feature_sparsity_l1 = std::stod(cells[5]);
    if (!cells[6].empty()) r.feature_sparsity_l2 = std::stod(cells[6]);
    if (!cells[7].empty()) r.l0_beta = std::stoi(cells[7]);
    if (!cells[8].empty()) r.max_col_norm = std::stod(cells[8]);
    log.records.push_back(r);
  }
  return log;
}

inline void save_log(const TrajectoryLog& log, const std::string& csv_path,
                     const std::string& header_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path);
  write_csv(log, csv);
  std::ofstream hdr(header_path);
  if (!hdr) throw std::runtime_error("cannot open " + header_path);
  nlohmann::json j = log.header;
  j["diverged"] = log.diverged;
  if (log.diverged) j["diverged_at"] = log.diverged_at;
  hdr << j.dump(2) << "\n";
}

/// Snapshot iteration grid: powers of two plus a fixed number of linear
/// checkpoints, always including 0 and T.
inline std::vector<long> default_snapshots(long horizon, int linear_count = 10) {
  std::vector<long> s{0, horizon};
  for (long g = 1; g < horizon; g *= 2) s.push_back(g);
  for (int i = 1; i < linear_count; ++i)
    s.push_back(horizon * i / linear_count);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace sgdlab
