#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "anoonly/model.hpp"

namespace anoonly {

enum class OptimizerKind { SGD, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double momentum = 0.0;  // SGD
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam betas must be in [0,1)");
    if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
  }
};

/// SGD with heavy-ball momentum, or Adam with bias correction. State is
/// keyed by parameter position, so one optimizer serves one model.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  void step(SSADModel& model) {
    auto params = model.parameters();
    if (first_.empty()) {
      for (const auto& p : params) {
        first_.emplace_back(p.value->rows(), p.value->cols());
        second_.emplace_back(p.value->rows(), p.value->cols());
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Matrix& w = *params[k].value;
      const Matrix& g = *params[k].grad;
      Matrix& m = first_[k];
      Matrix& v = second_[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (cfg_.kind == OptimizerKind::SGD) {
          m[i] = cfg_.momentum * m[i] + g[i];
          w[i] -= cfg_.lr * m[i];
        } else {
          m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
          v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
      }
    }
  }

  std::size_t steps() const noexcept { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::size_t t_ = 0;
};

}  // namespace anoonly
