#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sgdlab/dataset.hpp"
#include "sgdlab/matrix.hpp"
#include "sgdlab/model.hpp"

namespace sgdlab {

/// Thresholds used by the diagnostics; recorded in every log header.
struct MetricThresholds {
  double rank_tau = 1e-3;     // relative singular-value cutoff
  double corr_rho = 0.95;     // Pearson merge threshold
  bool corr_absolute = false; // merge on |pearson| instead of signed pearson
  double active_eps = 1e-8;   // activation counted as active above this
  double l0_rel = 1e-2;       // relative threshold for |beta| support counting
};

/// Mean squared error with the 1/(2n) convention.
inline double loss(const ModelState& m, const Dataset& ds) {
  if (ds.X.cols != static_cast<std::size_t>(m.input_dim))
    throw std::invalid_argument("loss: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < ds.X.rows; ++i) {
    const double r = predict(m, ds.X.row(i)) - ds.y[i];
    s += r * r;
  }
  return s / (2.0 * static_cast<double>(ds.X.rows));
}

inline std::vector<double> residuals(const ModelState& m, const Dataset& ds) {
  std::vector<double> r(ds.X.rows);
  for (std::size_t i = 0; i < ds.X.rows; ++i)
    r[i] = predict(m, ds.X.row(i)) - ds.y[i];
  return r;
}

/// Count of singular values above tau relative to the largest; 0 for a zero
/// matrix.
inline int jacobian_rank(const Matrix& phi, double tau) {
  if (tau <= 0.0 || tau >= 1.0)
    throw std::invalid_argument("jacobian_rank: tau must be in (0, 1)");
  const std::vector<double> sv = svd_singular_values(phi);
  if (sv.empty() || sv.front() == 0.0) return 0;
  int rank = 0;
  for (double s : sv)
    if (s / sv.front() > tau) ++rank;
  return rank;
}

/// Deduplicated-unit clustering of activation columns. Units are scanned in
/// index order; a unit joins the first cluster whose representative correlates
/// with it at least rho (signed by default), otherwise it founds a cluster.
/// All-zero columns stay unassigned to any cluster and are inactive everywhere.
struct ClusterAssignment {
  std::vector<int> cluster_of;        // unit -> cluster id, -1 for all-zero units
  std::vector<std::size_t> representative;  // cluster id -> founding unit
};

inline ClusterAssignment cluster_activations(const Matrix& A, double rho,
                                             bool absolute = false) {
  ClusterAssignment ca;
  ca.cluster_of.assign(A.cols, -1);
  std::vector<std::vector<double>> rep_cols;
  for (std::size_t j = 0; j < A.cols; ++j) {
    std::vector<double> col = A.column(j);
    const bool all_zero =
        std::all_of(col.begin(), col.end(), [](double v) { return v == 0.0; });
    if (all_zero) continue;
    int assigned = -1;
    for (std::size_t c = 0; c < rep_cols.size(); ++c) {
      const std::optional<double> p = pearson(rep_cols[c], col);
      if (!p) continue;  // zero-variance pair: correlation undefined, no merge
      const double val = absolute ? std::abs(*p) : *p;
      if (val >= rho) {
        assigned = static_cast<int>(c);
        break;
      }
    }
    if (assigned < 0) {
      assigned = static_cast<int>(rep_cols.size());
      rep_cols.push_back(col);
      ca.representative.push_back(j);
    }
    ca.cluster_of[j] = assigned;
  }
  return ca;
}

/// Feature sparsity coefficient: average over samples of the fraction of
/// distinct active units, with the total unit count as denominator so that
/// duplicated features lower the coefficient.
inline double feature_sparsity(const Matrix& A, double rho = 0.95,
                               double active_eps = 1e-8, bool absolute = false) {
  if (A.rows < 2)
    throw std::invalid_argument("feature_sparsity: need at least 2 samples");
  if (A.cols == 0) return 0.0;
  const ClusterAssignment ca = cluster_activations(A, rho, absolute);
  double active = 0.0;
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j : ca.representative)
      if (A(i, j) > active_eps) active += 1.0;
  return active / (static_cast<double>(A.rows) * static_cast<double>(A.cols));
}

/// ||u . v||_0 with a relative magnitude threshold.
inline int l0_beta(const ModelState& m, double rel_threshold = 1e-2) {
  const std::vector<double> beta = effective_predictor(m);
  double max_abs = 0.0;
  for (double b : beta) max_abs = std::max(max_abs, std::abs(b));
  if (max_abs == 0.0) return 0;
  int count = 0;
  for (double b : beta)
    if (std::abs(b) > rel_threshold * max_abs) ++count;
  return count;
}

/// Indices of the detected support of u . v (same threshold rule as l0_beta).
inline std::vector<int> beta_support(const ModelState& m, double rel_threshold = 1e-2) {
  const std::vector<double> beta = effective_predictor(m);
  double max_abs = 0.0;
  for (double b : beta) max_abs = std::max(max_abs, std::abs(b));
  std::vector<int> supp;
  if (max_abs == 0.0) return supp;
  for (std::size_t i = 0; i < beta.size(); ++i)
    if (std::abs(beta[i]) > rel_threshold * max_abs) supp.push_back(static_cast<int>(i));
  return supp;
}

/// Per-column Euclidean norms of the Jacobian.
inline std::vector<double> column_norms(const Matrix& phi) {
  std::vector<double> norms(phi.cols, 0.0);
  for (std::size_t i = 0; i < phi.rows; ++i)
    for (std::size_t j = 0; j < phi.cols; ++j) norms[j] += phi(i, j) * phi(i, j);
  for (double& n : norms) n = std::sqrt(n);
  return norms;
}

/// Coordinates of (theta_t - w_init) in the Gram-Schmidt orthonormal basis of
/// (w_star - w_init, w_flow - w_init).
inline std::vector<std::pair<double, double>> project_trajectory(
    const std::vector<std::vector<double>>& snapshots,
    const std::vector<double>& w_star, const std::vector<double>& w_flow,
    const std::vector<double>& w_init) {
  const std::size_t p = w_init.size();
  if (w_star.size() != p || w_flow.size() != p)
    throw std::invalid_argument("project_trajectory: length mismatch");
  std::vector<double> e1(p), d2(p);
  for (std::size_t i = 0; i < p; ++i) {
    e1[i] = w_star[i] - w_init[i];
    d2[i] = w_flow[i] - w_init[i];
  }
  const double n1 = norm2(e1);
  if (n1 == 0.0)
    throw std::invalid_argument("project_trajectory: degenerate basis");
  for (double& v : e1) v /= n1;
  const double proj = dot(d2, e1);
  std::vector<double> e2(p);
  for (std::size_t i = 0; i < p; ++i) e2[i] = d2[i] - proj * e1[i];
  const double n2 = norm2(e2);
  if (n2 <= 1e-12 * norm2(d2) || n2 == 0.0)
    throw std::invalid_argument("project_trajectory: spanning vectors parallel");
  for (double& v : e2) v /= n2;
  std::vector<std::pair<double, double>> out;
  out.reserve(snapshots.size());
  std::vector<double> delta(p);
  for (const auto& snap : snapshots) {
    if (snap.size() != p)
      throw std::invalid_argument("project_trajectory: snapshot length mismatch");
    for (std::size_t i = 0; i < p; ++i) delta[i] = snap[i] - w_init[i];
    out.emplace_back(dot(delta, e1), dot(delta, e2));
  }
  return out;
}

/// Per-student-neuron (max cosine to any teacher neuron, weight norm) for
/// two-layer ReLU networks. Zero-norm neurons report cosine 0.
inline std::vector<std::pair<double, double>> teacher_alignment(
    const ModelState& student, const ModelState& teacher) {
  if (student.arch != Arch::TwoLayerRelu || teacher.arch != Arch::TwoLayerRelu)
    throw std::invalid_argument("teacher_alignment: two-layer ReLU only");
  if (student.input_dim != teacher.input_dim)
    throw std::invalid_argument("teacher_alignment: input dim mismatch");
  const std::size_t d = static_cast<std::size_t>(student.input_dim);
  const std::size_t ws = static_cast<std::size_t>(student.widths[0]);
  const std::size_t wt = static_cast<std::size_t>(teacher.widths[0]);
  const double* Ws = student.theta.data() + ws;
  const double* Wt = teacher.theta.data() + wt;
  std::vector<std::pair<double, double>> out;
  out.reserve(ws);
  for (std::size_t j = 0; j < ws; ++j) {
    std::span<const double> sj(Ws + j * d, d);
    const double nj = norm2(sj);
    double best = 0.0;
    if (nj > 0.0) {
      bool first = true;
      for (std::size_t k = 0; k < wt; ++k) {
        std::span<const double> tk(Wt + k * d, d);
        const double nk = norm2(tk);
        if (nk == 0.0) continue;
        const double c = dot(sj, tk) / (nj * nk);
        if (first || c > best) {
          best = c;
          first = false;
        }
      }
      if (first) best = 0.0;
    }
    out.emplace_back(best, nj);
  }
  return out;
}

}  // namespace sgdlab
