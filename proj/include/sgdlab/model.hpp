#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgdlab/matrix.hpp"
#include "sgdlab/rng.hpp"

namespace sgdlab {

enum class Arch { DiagonalLinear, TwoLayerRelu, ThreeLayerRelu, Quadratic1D };

inline std::string arch_name(Arch a) {
  switch (a) {
    case Arch::DiagonalLinear: return "diagonal_linear";
    case Arch::TwoLayerRelu: return "two_layer_relu";
    case Arch::ThreeLayerRelu: return "three_layer_relu";
    case Arch::Quadratic1D: return "quadratic_1d";
  }
  return "?";
}

inline Arch arch_from_name(const std::string& s) {
  if (s == "diagonal_linear") return Arch::DiagonalLinear;
  if (s == "two_layer_relu") return Arch::TwoLayerRelu;
  if (s == "three_layer_relu") return Arch::ThreeLayerRelu;
  if (s == "quadratic_1d") return Arch::Quadratic1D;
  throw std::invalid_argument("unknown architecture: " + s);
}

/// A prediction function h_theta together with its flat parameter vector.
///
/// Flat layouts (row-major weight blocks, in order):
///   DiagonalLinear          [u(d), v(d)]                       h = <u.v, x>
///   TwoLayerRelu, no bias   [a(m), W(m x d)]                   h = <a, relu(Wx)>
///   TwoLayerRelu, bias      [a(m), W(m x d), b(m), c]          h = <a, relu(Wx+b)> + c
///   ThreeLayerRelu, no bias [a(m2), W2(m2 x m1), W1(m1 x d)]
///   ThreeLayerRelu, bias    [a(m2), W2, W1, b2(m2), b1(m1), c]
///   Quadratic1D             [theta]                            h = x * theta^2
struct ModelState {
  Arch arch = Arch::DiagonalLinear;
  int input_dim = 0;
  std::vector<int> widths;  // hidden widths, innermost layer first
  bool bias = false;
  std::vector<double> theta;

  int param_count() const { return static_cast<int>(theta.size()); }
};

namespace detail {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }
// Subgradient at 0 is fixed to 0.
inline double relu_grad(double z) { return z > 0.0 ? 1.0 : 0.0; }

inline std::size_t expected_params(const ModelState& m) {
  const std::size_t d = static_cast<std::size_t>(m.input_dim);
  switch (m.arch) {
    case Arch::DiagonalLinear: return 2 * d;
    case Arch::TwoLayerRelu: {
      const std::size_t w = static_cast<std::size_t>(m.widths.at(0));
      return w + w * d + (m.bias ? w + 1 : 0);
    }
    case Arch::ThreeLayerRelu: {
      const std::size_t w1 = static_cast<std::size_t>(m.widths.at(0));
      const std::size_t w2 = static_cast<std::size_t>(m.widths.at(1));
      return w2 + w2 * w1 + w1 * d + (m.bias ? w2 + w1 + 1 : 0);
    }
    case Arch::Quadratic1D: return 1;
  }
  return 0;
}

inline void check_input(const ModelState& m, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(m.input_dim))
    throw std::invalid_argument("model: input dimension mismatch");
  if (m.theta.size() != expected_params(m))
    throw std::invalid_argument("model: parameter vector does not match shape");
}

}  // namespace detail

inline double predict(const ModelState& m, std::span<const double> x) {
  detail::check_input(m, x);
  const std::size_t d = static_cast<std::size_t>(m.input_dim);
  switch (m.arch) {
    case Arch::DiagonalLinear: {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += m.theta[i] * m.theta[d + i] * x[i];
      return s;
    }
    case Arch::TwoLayerRelu: {
      const std::size_t w = static_cast<std::size_t>(m.widths[0]);
      const double* a = m.theta.data();
      const double* W = a + w;
      const double* b = m.bias ? W + w * d : nullptr;
      double s = 0.0;
      for (std::size_t j = 0; j < w; ++j) {
        double z = b ? b[j] : 0.0;
        for (std::size_t k = 0; k < d; ++k) z += W[j * d + k] * x[k];
        s += a[j] * detail::relu(z);
      }
      if (m.bias) s += m.theta.back();
      return s;
    }
    case Arch::ThreeLayerRelu: {
      const std::size_t w1 = static_cast<std::size_t>(m.widths[0]);
      const std::size_t w2 = static_cast<std::size_t>(m.widths[1]);
      const double* a = m.theta.data();
      const double* W2 = a + w2;
      const double* W1 = W2 + w2 * w1;
      const double* b2 = m.bias ? W1 + w1 * d : nullptr;
      const double* b1 = b2 ? b2 + w2 : nullptr;
      std::vector<double> h1(w1);
      for (std::size_t k = 0; k < w1; ++k) {
        double z = b1 ? b1[k] : 0.0;
        for (std::size_t l = 0; l < d; ++l) z += W1[k * d + l] * x[l];
        h1[k] = detail::relu(z);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < w2; ++j) {
        double z = b2 ? b2[j] : 0.0;
        for (std::size_t k = 0; k < w1; ++k) z += W2[j * w1 + k] * h1[k];
        s += a[j] * detail::relu(z);
      }
      if (m.bias) s += m.theta.back();
      return s;
    }
    case Arch::Quadratic1D:
      return x[0] * m.theta[0] * m.theta[0];
  }
  return 0.0;
}

/// Closed-form gradient of h_theta(x) with respect to theta.
inline std::vector<double> per_sample_gradient(const ModelState& m,
                                               std::span<const double> x) {
  detail::check_input(m, x);
  const std::size_t d = static_cast<std::size_t>(m.input_dim);
  std::vector<double> g(m.theta.size(), 0.0);
  switch (m.arch) {
    case Arch::DiagonalLinear: {
      for (std::size_t i = 0; i < d; ++i) {
        g[i] = m.theta[d + i] * x[i];      // d/du_i = v_i x_i
        g[d + i] = m.theta[i] * x[i];      // d/dv_i = u_i x_i
      }
      break;
    }
    case Arch::TwoLayerRelu: {
      const std::size_t w = static_cast<std::size_t>(m.widths[0]);
      const double* a = m.theta.data();
      const double* W = a + w;
      const double* b = m.bias ? W + w * d : nullptr;
      for (std::size_t j = 0; j < w; ++j) {
        double z = b ? b[j] : 0.0;
        for (std::size_t k = 0; k < d; ++k) z += W[j * d + k] * x[k];
        g[j] = detail::relu(z);
        const double act = a[j] * detail::relu_grad(z);
        for (std::size_t k = 0; k < d; ++k) g[w + j * d + k] = act * x[k];
        if (b) g[w + w * d + j] = act;
      }
      if (m.bias) g.back() = 1.0;
      break;
    }
    case Arch::ThreeLayerRelu: {
      const std::size_t w1 = static_cast<std::size_t>(m.widths[0]);
      const std::size_t w2 = static_cast<std::size_t>(m.widths[1]);
      const double* a = m.theta.data();
      const double* W2 = a + w2;
      const double* W1 = W2 + w2 * w1;
      const double* b2 = m.bias ? W1 + w1 * d : nullptr;
      const double* b1 = b2 ? b2 + w2 : nullptr;
      std::vector<double> z1(w1), h1(w1), z2(w2);
      for (std::size_t k = 0; k < w1; ++k) {
        double z = b1 ? b1[k] : 0.0;
        for (std::size_t l = 0; l < d; ++l) z += W1[k * d + l] * x[l];
        z1[k] = z;
        h1[k] = detail::relu(z);
      }
      for (std::size_t j = 0; j < w2; ++j) {
        double z = b2 ? b2[j] : 0.0;
        for (std::size_t k = 0; k < w1; ++k) z += W2[j * w1 + k] * h1[k];
        z2[j] = z;
      }
      const std::size_t off_w2 = w2;
      const std::size_t off_w1 = w2 + w2 * w1;
      // dh/dz1_k backpropagated through the active units of layer 2.
      std::vector<double> g1(w1, 0.0);
      for (std::size_t j = 0; j < w2; ++j) {
        g[j] = detail::relu(z2[j]);  // d/da_j
        const double aj = a[j] * detail::relu_grad(z2[j]);
        for (std::size_t k = 0; k < w1; ++k) {
          g[off_w2 + j * w1 + k] = aj * h1[k];  // d/dW2_{jk}
          g1[k] += aj * W2[j * w1 + k];
        }
        if (b2) g[off_w1 + w1 * d + j] = aj;  // d/db2_j
      }
      for (std::size_t k = 0; k < w1; ++k) {
        const double gk = g1[k] * detail::relu_grad(z1[k]);
        for (std::size_t l = 0; l < d; ++l) g[off_w1 + k * d + l] = gk * x[l];
        if (b1) g[off_w1 + w1 * d + w2 + k] = gk;  // d/db1_k
      }
      if (m.bias) g.back() = 1.0;
      break;
    }
    case Arch::Quadratic1D:
      g[0] = 2.0 * x[0] * m.theta[0];
      break;
  }
  return g;
}

/// NTK feature matrix: row i is the per-sample gradient at x_i (n x p).
inline Matrix jacobian(const ModelState& m, const Matrix& X) {
  if (X.cols != static_cast<std::size_t>(m.input_dim))
    throw std::invalid_argument("jacobian: input dimension mismatch");
  Matrix phi(X.rows, m.theta.size());
  for (std::size_t i = 0; i < X.rows; ++i) {
    const std::vector<double> g = per_sample_gradient(m, X.row(i));
    std::copy(g.begin(), g.end(), phi.row(i).begin());
  }
  return phi;
}

/// Post-activation hidden values per sample. layer is 1-based and counts
/// hidden layers from the input side; ReLU architectures only.
inline Matrix activations(const ModelState& m, const Matrix& X, int layer) {
  if (m.arch != Arch::TwoLayerRelu && m.arch != Arch::ThreeLayerRelu)
    throw std::invalid_argument("activations: architecture has no hidden layers");
  const int n_hidden = m.arch == Arch::TwoLayerRelu ? 1 : 2;
  if (layer < 1 || layer > n_hidden)
    throw std::invalid_argument("activations: layer out of range");
  if (X.cols != static_cast<std::size_t>(m.input_dim))
    throw std::invalid_argument("activations: input dimension mismatch");
  const std::size_t d = static_cast<std::size_t>(m.input_dim);
  if (m.arch == Arch::TwoLayerRelu) {
    const std::size_t w = static_cast<std::size_t>(m.widths[0]);
    const double* W = m.theta.data() + w;
    const double* b = m.bias ? W + w * d : nullptr;
    Matrix out(X.rows, w);
    for (std::size_t i = 0; i < X.rows; ++i) {
      auto x = X.row(i);
      for (std::size_t j = 0; j < w; ++j) {
        double z = b ? b[j] : 0.0;
        for (std::size_t k = 0; k < d; ++k) z += W[j * d + k] * x[k];
        out(i, j) = detail::relu(z);
      }
    }
    return out;
  }
  const std::size_t w1 = static_cast<std::size_t>(m.widths[0]);
  const std::size_t w2 = static_cast<std::size_t>(m.widths[1]);
  const double* W2 = m.theta.data() + w2;
  const double* W1 = W2 + w2 * w1;
  const double* b2 = m.bias ? W1 + w1 * d : nullptr;
  const double* b1 = b2 ? b2 + w2 : nullptr;
  Matrix out(X.rows, layer == 1 ? w1 : w2);
  for (std::size_t i = 0; i < X.rows; ++i) {
    auto x = X.row(i);
    std::vector<double> h1(w1);
    for (std::size_t k = 0; k < w1; ++k) {
      double z = b1 ? b1[k] : 0.0;
      for (std::size_t l = 0; l < d; ++l) z += W1[k * d + l] * x[l];
      h1[k] = detail::relu(z);
    }
    if (layer == 1) {
      std::copy(h1.begin(), h1.end(), out.row(i).begin());
      continue;
    }
    for (std::size_t j = 0; j < w2; ++j) {
      double z = b2 ? b2[j] : 0.0;
      for (std::size_t k = 0; k < w1; ++k) z += W2[j * w1 + k] * h1[k];
      out(i, j) = detail::relu(z);
    }
  }
  return out;
}

/// beta_i = u_i * v_i for the diagonal linear architecture.
inline std::vector<double> effective_predictor(const ModelState& m) {
  if (m.arch != Arch::DiagonalLinear)
    throw std::invalid_argument("effective_predictor: diagonal linear only");
  const std::size_t d = static_cast<std::size_t>(m.input_dim);
  std::vector<double> beta(d);
  for (std::size_t i = 0; i < d; ++i) beta[i] = m.theta[i] * m.theta[d + i];
  return beta;
}

inline ModelState make_diagonal_linear(int d, double u0 = 0.1, double v0 = 0.0) {
  ModelState m;
  m.arch = Arch::DiagonalLinear;
  m.input_dim = d;
  m.theta.assign(2 * static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) {
    m.theta[static_cast<std::size_t>(i)] = u0;
    m.theta[static_cast<std::size_t>(d + i)] = v0;
  }
  return m;
}

/// Centered Gaussian init with per-layer std = scale / sqrt(fan_in); biases 0.
inline ModelState make_two_layer_relu(int d, int width, bool bias, double scale,
                                      RngStream& rng) {
  ModelState m;
  m.arch = Arch::TwoLayerRelu;
  m.input_dim = d;
  m.widths = {width};
  m.bias = bias;
  const std::size_t w = static_cast<std::size_t>(width);
  m.theta.assign(detail::expected_params(m), 0.0);
  const double sa = scale / std::sqrt(static_cast<double>(width));
  const double sw = scale / std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < w; ++j) m.theta[j] = sa * rng.gaussian();
  for (std::size_t k = 0; k < w * static_cast<std::size_t>(d); ++k)
    m.theta[w + k] = sw * rng.gaussian();
  return m;
}

inline ModelState make_three_layer_relu(int d, int w1, int w2, bool bias,
                                        double scale, RngStream& rng) {
  ModelState m;
  m.arch = Arch::ThreeLayerRelu;
  m.input_dim = d;
  m.widths = {w1, w2};
  m.bias = bias;
  m.theta.assign(detail::expected_params(m), 0.0);
  const std::size_t n2 = static_cast<std::size_t>(w2);
  const std::size_t n21 = n2 * static_cast<std::size_t>(w1);
  const std::size_t n1d = static_cast<std::size_t>(w1) * static_cast<std::size_t>(d);
  const double sa = scale / std::sqrt(static_cast<double>(w2));
  const double s2 = scale / std::sqrt(static_cast<double>(w1));
  const double s1 = scale / std::sqrt(static_cast<double>(d));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n2; ++i) m.theta[k++] = sa * rng.gaussian();
  for (std::size_t i = 0; i < n21; ++i) m.theta[k++] = s2 * rng.gaussian();
  for (std::size_t i = 0; i < n1d; ++i) m.theta[k++] = s1 * rng.gaussian();
  return m;
}

inline ModelState make_quadratic_1d(double theta0) {
  ModelState m;
  m.arch = Arch::Quadratic1D;
  m.input_dim = 1;
  m.theta = {theta0};
  return m;
}

}  // namespace sgdlab
