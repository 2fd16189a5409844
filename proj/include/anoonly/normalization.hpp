#pragma once

#include <cmath>
#include <optional>

#include "anoonly/matrix.hpp"

namespace anoonly {

/// Per-column batch normalization with hand-written backward pass.
///
/// Train mode normalizes each column by the batch mean and the biased batch
/// variance, then folds the batch statistics into the running estimates.
/// Eval mode is a per-row transform using the running estimates only.
/// With affine disabled this is the parameter-free variant (gamma = 1,
/// beta = 0 and no learnable state).
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  explicit BatchNormLayer(std::size_t dim, bool affine = false, double eps = 1e-5,
                          double momentum = 0.1)
      : eps(eps),
        momentum(momentum),
        gamma(1, affine ? dim : 0, 1.0),
        beta(1, affine ? dim : 0, 0.0),
        grad_gamma(1, affine ? dim : 0),
        grad_beta(1, affine ? dim : 0),
        running_mean(1, dim, 0.0),
        running_var(1, dim, 1.0) {
    if (dim == 0) throw ConfigError("batch norm dim must be >= 1");
    if (!(eps > 0.0)) throw ConfigError("batch norm eps must be > 0");
    if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("batch norm momentum must be in (0,1)");
  }

  std::size_t dim() const noexcept { return running_mean.cols(); }
  bool affine() const noexcept { return gamma.cols() != 0; }

  Matrix forward_train(const Matrix& h) {
    check_dim(h, "bn_forward_train");
    const std::size_t b = h.rows();
    if (b < 2) throw BatchTooSmallError("bn_forward_train: batch of " + std::to_string(b) + " row(s)");
    const std::size_t d = dim();
    const double inv_b = 1.0 / static_cast<double>(b);

    Cache c{Matrix(1, d), Matrix(1, d), Matrix(b, d), Matrix(b, d), false};
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j) c.mean[j] += h(i, j);
    for (std::size_t j = 0; j < d; ++j) c.mean[j] *= inv_b;
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double dev = h(i, j) - c.mean[j];
        c.centered(i, j) = dev;
        c.var[j] += dev * dev;
      }
    for (std::size_t j = 0; j < d; ++j) c.var[j] *= inv_b;

    Matrix out(b, d);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double xhat = c.centered(i, j) / std::sqrt(c.var[j] + eps);
        c.normalized(i, j) = xhat;
        out(i, j) = affine() ? gamma[j] * xhat + beta[j] : xhat;
      }

    for (std::size_t j = 0; j < d; ++j) {
      running_mean[j] = (1.0 - momentum) * running_mean[j] + momentum * c.mean[j];
      running_var[j] = (1.0 - momentum) * running_var[j] + momentum * c.var[j];
    }
    cache = std::move(c);
    return out;
  }

  Matrix forward_eval(const Matrix& h) const {
    check_dim(h, "bn_forward_eval");
    Matrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < h.cols(); ++j) {
        const double xhat = (h(i, j) - running_mean[j]) / std::sqrt(running_var[j] + eps);
        out(i, j) = affine() ? gamma[j] * xhat + beta[j] : xhat;
      }
    return out;
  }

  /// Train-time forward that normalizes with the running estimates instead
  /// of batch statistics and leaves them untouched. Used when batches are too
  /// small for batch statistics; backward then has only the direct path.
  Matrix forward_frozen(const Matrix& h) {
    Matrix out = forward_eval(h);
    Cache c{running_mean, running_var, Matrix(h.rows(), h.cols()), Matrix(h.rows(), h.cols()), true};
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < h.cols(); ++j) {
        c.centered(i, j) = h(i, j) - running_mean[j];
        c.normalized(i, j) = c.centered(i, j) / std::sqrt(running_var[j] + eps);
      }
    cache = std::move(c);
    return out;
  }

  /// dL/dH from dL/dH'. Sums the direct path through 1/sqrt(var + eps), the
  /// path through the batch variance and the path through the batch mean.
  Matrix backward(const Matrix& grad_out) {
    if (!cache) throw StateError("bn_backward: no cached train-mode forward");
    const Cache c = std::move(*cache);
    cache.reset();
    if (!grad_out.same_shape(c.normalized)) {
      throw ShapeError("bn_backward: grad " + grad_out.shape() + " vs cached " + c.normalized.shape());
    }
    const std::size_t b = grad_out.rows();
    const std::size_t d = dim();
    const double bd = static_cast<double>(b);

    Matrix grad_xhat = grad_out;
    if (affine()) {
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          grad_gamma[j] += grad_out(i, j) * c.normalized(i, j);
          grad_beta[j] += grad_out(i, j);
          grad_xhat(i, j) *= gamma[j];
        }
    }

    Matrix grad_in(b, d);
    if (c.frozen) {
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < d; ++j) grad_in(i, j) = grad_xhat(i, j) / std::sqrt(c.var[j] + eps);
      return grad_in;
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double inv_std = 1.0 / std::sqrt(c.var[j] + eps);
      double grad_var = 0.0;
      double grad_mean = 0.0;
      double centered_sum = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        grad_var += grad_xhat(i, j) * c.centered(i, j);
        grad_mean -= grad_xhat(i, j) * inv_std;
        centered_sum += c.centered(i, j);
      }
      grad_var *= -0.5 * inv_std * inv_std * inv_std;
      grad_mean += grad_var * (-2.0 / bd) * centered_sum;
      for (std::size_t i = 0; i < b; ++i) {
        grad_in(i, j) = grad_xhat(i, j) * inv_std + grad_var * 2.0 * c.centered(i, j) / bd +
                        grad_mean / bd;
      }
    }
    return grad_in;
  }

  void zero_grad() {
    grad_gamma.fill(0.0);
    grad_beta.fill(0.0);
  }

  struct Cache {
    Matrix mean;        // 1 x d
    Matrix var;         // 1 x d, biased
    Matrix centered;    // h - mean
    Matrix normalized;  // pre-affine output
    bool frozen = false;  // statistics were constants, not batch functions
  };

  double eps = 1e-5;
  double momentum = 0.1;
  Matrix gamma;
  Matrix beta;
  Matrix grad_gamma;
  Matrix grad_beta;
  Matrix running_mean;
  Matrix running_var;
  std::optional<Cache> cache;

 private:
  void check_dim(const Matrix& h, const char* op) const {
    if (h.cols() != dim()) {
      throw ShapeError(std::string(op) + ": input " + h.shape() + " vs dim " + std::to_string(dim()));
    }
  }
};

/// Per-row normalization over the feature axis. No affine parameters and no
/// running statistics, so train and eval behave identically.
class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  explicit LayerNormLayer(std::size_t dim, double eps = 1e-5) : eps(eps), dim_(dim) {
    if (dim == 0) throw ConfigError("layer norm dim must be >= 1");
    if (!(eps > 0.0)) throw ConfigError("layer norm eps must be > 0");
  }

  std::size_t dim() const noexcept { return dim_; }

  Matrix forward(const Matrix& h) {
    Matrix inv_std(h.rows(), 1);
    Matrix out = normalize(h, &inv_std);
    cache = Cache{out, std::move(inv_std)};
    return out;
  }

  Matrix apply(const Matrix& h) const { return normalize(h, nullptr); }

  Matrix backward(const Matrix& grad_out) {
    if (!cache) throw StateError("ln_backward: no cached forward");
    const Cache c = std::move(*cache);
    cache.reset();
    if (!grad_out.same_shape(c.normalized)) {
      throw ShapeError("ln_backward: grad " + grad_out.shape() + " vs cached " + c.normalized.shape());
    }
    const double n = static_cast<double>(dim_);
    Matrix grad_in(grad_out.rows(), grad_out.cols());
    for (std::size_t i = 0; i < grad_out.rows(); ++i) {
      double sum_g = 0.0;
      double sum_gx = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        sum_g += grad_out(i, j);
        sum_gx += grad_out(i, j) * c.normalized(i, j);
      }
      for (std::size_t j = 0; j < dim_; ++j) {
        grad_in(i, j) = c.inv_std[i] * (grad_out(i, j) - sum_g / n - c.normalized(i, j) * sum_gx / n);
      }
    }
    return grad_in;
  }

  struct Cache {
    Matrix normalized;
    Matrix inv_std;  // rows x 1
  };

  double eps = 1e-5;
  std::optional<Cache> cache;

 private:
  Matrix normalize(const Matrix& h, Matrix* inv_std_out) const {
    if (h.cols() != dim_) {
      throw ShapeError("ln_forward: input " + h.shape() + " vs dim " + std::to_string(dim_));
    }
    const double n = static_cast<double>(dim_);
    Matrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
      auto r = h.row(i);
      double mean = 0.0;
      for (double v : r) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : r) var += (v - mean) * (v - mean);
      var /= n;
      const double inv_std = 1.0 / std::sqrt(var + eps);
      for (std::size_t j = 0; j < dim_; ++j) out(i, j) = (r[j] - mean) * inv_std;
      if (inv_std_out) (*inv_std_out)[i] = inv_std;
    }
    return out;
  }

  std::size_t dim_ = 0;
};

}  // namespace anoonly
