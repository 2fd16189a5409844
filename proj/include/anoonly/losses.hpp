#pragma once

#include <span>
#include <string>
#include <vector>

#include "anoonly/format.hpp"
#include "anoonly/matrix.hpp"
#include "anoonly/model.hpp"

namespace anoonly {

/// Semi-supervised training label. Only labeled anomalies carry supervision;
/// everything else is "unlabeled" and treated as normal by DeepSAD.
enum class TrainLabel : int { LabeledAnomaly = -1, Unlabeled = 1 };

struct LabeledBatch {
  Matrix features;
  std::vector<TrainLabel> labels;
};

enum class Objective { DeepSAD, AnoOnly, Reweighted, AnoOnlyExplicitBN };

inline std::string to_string(Objective o) {
  switch (o) {
    case Objective::DeepSAD: return "deepsad";
    case Objective::AnoOnly: return "anoonly";
    case Objective::Reweighted: return "reweighted";
    case Objective::AnoOnlyExplicitBN: return "anoonly_explicit_bn";
  }
  return "?";
}

inline Objective parse_objective(const std::string& s) {
  if (s == "deepsad") return Objective::DeepSAD;
  if (s == "anoonly") return Objective::AnoOnly;
  if (s == "reweighted") return Objective::Reweighted;
  if (s == "anoonly_explicit_bn") return Objective::AnoOnlyExplicitBN;
  throw ConfigError("unknown objective '" + s + "'");
}

struct LossConfig {
  Objective objective = Objective::AnoOnly;
  double lambda_n = 0.0;  // read only by Reweighted
  double lambda = 1e-6;   // weight decay
  double score_eps = 1e-6;

  void validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(lambda_n >= 0.0)) throw ConfigError("lambda_n must be >= 0");
    if (!(score_eps > 0.0)) throw ConfigError("score_eps must be > 0");
  }

  /// Weight on the unlabeled-data term actually applied by the objective.
  double effective_lambda_n() const {
    switch (objective) {
      case Objective::DeepSAD: return 1.0;
      case Objective::Reweighted: return lambda_n;
      case Objective::AnoOnly:
      case Objective::AnoOnlyExplicitBN: return 0.0;
    }
    return 0.0;
  }

  // Reweighted at lambda_n = 0 is AnoOnly, in training as well as per batch.
  bool uses_normal_term() const { return effective_lambda_n() != 0.0; }
};

struct BatchLossReport {
  double total = 0.0;
  double l_normal = 0.0;
  double l_anomaly = 0.0;
  double l_bn_explicit = 0.0;
  double l_reg = 0.0;
  std::size_t n_anomaly_rows = 0;
  std::size_t n_unlabeled_rows = 0;
  bool zero_anomaly = false;

  static std::string csv_header() {
    return "total,l_normal,l_anomaly,l_bn_explicit,l_reg,n_anomaly_rows,n_unlabeled_rows,zero_anomaly";
  }
  std::string csv_row() const {
    return format_double(total) + "," + format_double(l_normal) + "," + format_double(l_anomaly) + "," +
           format_double(l_bn_explicit) + "," + format_double(l_reg) + "," + std::to_string(n_anomaly_rows) +
           "," + std::to_string(n_unlabeled_rows) + "," + (zero_anomaly ? "1" : "0");
  }
};

struct ScoreLoss {
  double value = 0.0;
  Vector grad;  // d value / d score, per row
};

struct MatrixLoss {
  double value = 0.0;
  Matrix grad;
};

inline std::vector<bool> label_mask(std::span<const TrainLabel> labels, TrainLabel which) {
  std::vector<bool> m(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == which;
  return m;
}

/// lambda_n * sum of unlabeled scores.
inline ScoreLoss loss_normal(std::span<const double> scores, const std::vector<bool>& unlabeled,
                             double lambda_n) {
  if (unlabeled.size() != scores.size()) throw ShapeError("loss_normal: mask/score length mismatch");
  ScoreLoss out{0.0, Vector(scores.size(), 0.0)};
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!unlabeled[i]) continue;
    sum += scores[i];
    out.grad[i] = lambda_n;
  }
  out.value = lambda_n * sum;
  return out;
}

/// Sum over labeled anomalies of 1 / (score + score_eps).
inline ScoreLoss loss_anomaly(std::span<const double> scores, const std::vector<bool>& anomaly,
                              double score_eps) {
  if (anomaly.size() != scores.size()) throw ShapeError("loss_anomaly: mask/score length mismatch");
  ScoreLoss out{0.0, Vector(scores.size(), 0.0)};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!anomaly[i]) continue;
    const double denom = scores[i] + score_eps;
    out.value += 1.0 / denom;
    out.grad[i] = -1.0 / (denom * denom);
  }
  return out;
}

/// Explicit cluster loss on the pre-normalizer batch h. Per column: squared
/// mean plus squared deviation of the (b-1)-normalized variance from one.
/// Zero exactly when every column is standardized.
inline MatrixLoss loss_bn_explicit(const Matrix& h) {
  const std::size_t b = h.rows();
  if (b < 2) throw BatchTooSmallError("loss_bn_explicit: batch of " + std::to_string(b) + " row(s)");
  const double bd = static_cast<double>(b);
  MatrixLoss out{0.0, Matrix(b, h.cols())};
  for (std::size_t j = 0; j < h.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < b; ++i) mean += h(i, j);
    mean /= bd;
    double ss = 0.0;
    for (std::size_t i = 0; i < b; ++i) ss += (h(i, j) - mean) * (h(i, j) - mean);
    const double var = ss / (bd - 1.0);
    const double resid = var - 1.0;
    out.value += mean * mean + resid * resid;
    // d(mean^2)/dh_i = 2 mean / b; d(var)/dh_i = 2 (h_i - mean) / (b - 1)
    for (std::size_t i = 0; i < b; ++i) {
      out.grad(i, j) = 2.0 * mean / bd + 2.0 * resid * 2.0 * (h(i, j) - mean) / (bd - 1.0);
    }
  }
  return out;
}

/// lambda * squared L2 norm over weight matrices (biases and normalizer
/// parameters excluded). Adds 2 lambda w to the gradients when accumulate.
inline double loss_reg(SSADModel& model, double lambda, bool accumulate = true) {
  double sum = 0.0;
  for (const auto& p : model.parameters()) {
    if (!p.decays) continue;
    sum += squared_norm(*p.value);
    if (accumulate && lambda != 0.0) {
      for (std::size_t i = 0; i < p.value->size(); ++i) (*p.grad)[i] += 2.0 * lambda * (*p.value)[i];
    }
  }
  return lambda * sum;
}

/// Full objective on one batch. Runs a train-mode forward and backward,
/// leaving the parameter gradients in the model. The normalizer still sees
/// every row, so under AnoOnly unlabeled rows influence the update only
/// through batch statistics. grad_input, when given, receives dL/dx.
inline BatchLossReport composite_loss(SSADModel& model, const LabeledBatch& batch, const LossConfig& config,
                                      Matrix* grad_input = nullptr) {
  config.validate();
  if (batch.labels.size() != batch.features.rows()) {
    throw ShapeError("composite_loss: " + std::to_string(batch.labels.size()) + " labels for " +
                     std::to_string(batch.features.rows()) + " rows");
  }
  const bool explicit_bn = config.objective == Objective::AnoOnlyExplicitBN;
  if (explicit_bn && model.recipe().normalizer.type != NormalizerKind::Type::None) {
    throw ConfigError("anoonly_explicit_bn replaces the normalizer; model must use normalizer 'none'");
  }

  const auto anomaly = label_mask(batch.labels, TrainLabel::LabeledAnomaly);
  const auto unlabeled = label_mask(batch.labels, TrainLabel::Unlabeled);

  BatchLossReport rep;
  for (bool a : anomaly) rep.n_anomaly_rows += a ? 1 : 0;
  rep.n_unlabeled_rows = batch.labels.size() - rep.n_anomaly_rows;
  rep.zero_anomaly = rep.n_anomaly_rows == 0;

  model.train();
  model.zero_grad();
  const Matrix out = model.forward(batch.features);
  const Vector scores = SSADModel::row_squared_norms(out);

  Vector grad_scores(scores.size(), 0.0);
  if (config.uses_normal_term()) {
    auto ln = loss_normal(scores, unlabeled, config.effective_lambda_n());
    rep.l_normal = ln.value;
    for (std::size_t i = 0; i < scores.size(); ++i) grad_scores[i] += ln.grad[i];
  }
  auto la = loss_anomaly(scores, anomaly, config.score_eps);
  rep.l_anomaly = la.value;
  for (std::size_t i = 0; i < scores.size(); ++i) grad_scores[i] += la.grad[i];

  Matrix grad_out(out.rows(), out.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) grad_out(i, j) = grad_scores[i] * 2.0 * out(i, j);

  if (explicit_bn) {
    auto lbn = loss_bn_explicit(model.hidden());
    rep.l_bn_explicit = lbn.value;
    Matrix gx = model.backward(grad_out, &lbn.grad);
    if (grad_input) *grad_input = std::move(gx);
  } else {
    Matrix gx = model.backward(grad_out);
    if (grad_input) *grad_input = std::move(gx);
  }
  rep.l_reg = loss_reg(model, config.lambda);
  rep.total = rep.l_normal + rep.l_anomaly + rep.l_bn_explicit + rep.l_reg;
  return rep;
}

}  // namespace anoonly
