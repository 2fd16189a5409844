#pragma once

#include <cmath>
#include <optional>

#include "anoonly/matrix.hpp"
#include "anoonly/random.hpp"

namespace anoonly {

/// Fully connected layer computing x * W + b over a batch of rows.
///
/// Gradients accumulate into grad_weight / grad_bias until zero_grad() is
/// called, so several backward passes can contribute to one update.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim, bool with_bias = true)
      : weight(in_dim, out_dim),
        bias(1, with_bias ? out_dim : 0),
        grad_weight(in_dim, out_dim),
        grad_bias(1, with_bias ? out_dim : 0) {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("dense layer dims must be >= 1");
  }

  /// Weights ~ U(-1/sqrt(in_dim), 1/sqrt(in_dim)); bias zero.
  void init_uniform(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : weight.data()) w = dist(rng);
    bias.fill(0.0);
  }

  std::size_t in_dim() const noexcept { return weight.rows(); }
  std::size_t out_dim() const noexcept { return weight.cols(); }
  bool has_bias() const noexcept { return bias.cols() != 0; }

  Matrix forward(const Matrix& x) {
    Matrix y = apply(x);
    cached_input = x;
    return y;
  }

  /// Forward without caching; safe to call concurrently on a const layer.
  Matrix apply(const Matrix& x) const {
    if (x.cols() != in_dim()) {
      throw ShapeError("dense_forward: input " + x.shape() + " vs weight " + weight.shape());
    }
    Matrix y = matmul(x, weight);
    if (has_bias()) {
      for (std::size_t i = 0; i < y.rows(); ++i) {
        auto r = y.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
      }
    }
    return y;
  }

  Matrix backward(const Matrix& grad_out) {
    if (!cached_input) throw StateError("dense_backward: no cached forward input");
    if (grad_out.rows() != cached_input->rows() || grad_out.cols() != out_dim()) {
      throw ShapeError("dense_backward: grad " + grad_out.shape());
    }
    const Matrix input = std::move(*cached_input);
    cached_input.reset();
    grad_weight += matmul_tn(input, grad_out);
    if (has_bias()) {
      for (std::size_t i = 0; i < grad_out.rows(); ++i) {
        auto g = grad_out.row(i);
        for (std::size_t j = 0; j < g.size(); ++j) grad_bias[j] += g[j];
      }
    }
    return matmul_nt(grad_out, weight);
  }

  void zero_grad() {
    grad_weight.fill(0.0);
    grad_bias.fill(0.0);
  }

  Matrix weight;
  Matrix bias;
  Matrix grad_weight;
  Matrix grad_bias;
  std::optional<Matrix> cached_input;
};

}  // namespace anoonly
