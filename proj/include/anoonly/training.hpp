#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "anoonly/data.hpp"
#include "anoonly/losses.hpp"
#include "anoonly/metrics.hpp"
#include "anoonly/model.hpp"
#include "anoonly/optimizer.hpp"

namespace anoonly {

/// What to do with a batch that holds no labeled anomaly under an
/// objective without a normal term.
enum class ZeroAnomalyPolicy {
  SkipUpdate,   // forward anyway so batch norm running stats move; no step
  SkipEntirely  // neither forward nor step
};

struct TrainConfig {
  std::size_t epochs = 200;
  OptimizerConfig optimizer;
  BatcherSpec batcher;
  LossConfig loss;
  ModelRecipe model;
  ZeroAnomalyPolicy zero_anomaly_policy = ZeroAnomalyPolicy::SkipUpdate;
  std::uint64_t seed = 0;
  bool record_steps = false;

  void validate() const {
    optimizer.validate();
    loss.validate();
    model.validate();
    if (batcher.batch_size == 0) throw ConfigError("batch size must be >= 1");
  }
};

struct EpochLoss {
  double total = 0.0;
  double l_normal = 0.0;
  double l_anomaly = 0.0;
  double l_bn_explicit = 0.0;
  double l_reg = 0.0;
  std::size_t steps = 0;
};

enum class RunStatus { Ok, Diverged, Failed };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Failed: return "failed";
  }
  return "?";
}

inline RunStatus parse_run_status(const std::string& s) {
  if (s == "ok") return RunStatus::Ok;
  if (s == "diverged") return RunStatus::Diverged;
  if (s == "failed") return RunStatus::Failed;
  throw ConfigError("unknown run status '" + s + "'");
}

struct TrainResult {
  SSADModel model;
  std::vector<EpochLoss> epochs;            // per-epoch means over update steps
  std::vector<BatchLossReport> steps;       // only when record_steps
  std::size_t updates = 0;
  std::size_t skipped_batches = 0;
  RunStatus status = RunStatus::Ok;
  std::string diagnostic;
  std::vector<std::string> warnings;
};

/// Trains a fresh model built from cfg.model on the train split only.
/// Deterministic in (dataset, cfg). A non-finite loss stops training and is
/// reported through status/diagnostic rather than thrown.
inline TrainResult train(const SemiDataset& train_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.split != Split::Train) throw ConfigError("train() must be given the train split");
  if (cfg.model.input_dim != train_set.features.cols()) {
    throw ConfigError("model input_dim " + std::to_string(cfg.model.input_dim) + " vs data dim " +
                      std::to_string(train_set.features.cols()));
  }
  if (cfg.loss.objective == Objective::AnoOnlyExplicitBN &&
      cfg.model.normalizer.type != NormalizerKind::Type::None) {
    throw ConfigError("anoonly_explicit_bn requires normalizer 'none'");
  }

  TrainResult res{build_model(cfg.model), {}, {}, 0, 0, RunStatus::Ok, {}, {}};
  SSADModel& model = res.model;
  const bool bn = model.recipe().normalizer.is_batch_norm();
  const bool needs_pairs = bn || cfg.loss.objective == Objective::AnoOnlyExplicitBN;
  if (bn && cfg.batcher.batch_size < 2) {
    model.set_freeze_batch_stats(true);
    res.warnings.push_back("batch size < 2: batch norm uses running statistics during training");
  }
  const bool pairs_required = needs_pairs && !model.freeze_batch_stats();

  Batcher batcher(cfg.batcher, cfg.seed);
  Optimizer opt(cfg.optimizer);
  const bool anomaly_only = !cfg.loss.uses_normal_term();

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    EpochLoss acc;
    for (const auto& idx : batcher.epoch(train_set)) {
      if (pairs_required && idx.size() < 2) {
        ++res.skipped_batches;
        continue;
      }
      const LabeledBatch batch = train_set.gather(idx);
      bool has_anomaly = false;
      for (auto l : batch.labels) has_anomaly = has_anomaly || l == TrainLabel::LabeledAnomaly;
      if (anomaly_only && !has_anomaly) {
        ++res.skipped_batches;
        if (cfg.zero_anomaly_policy == ZeroAnomalyPolicy::SkipUpdate) {
          model.train();
          model.forward(batch.features);
        }
        continue;
      }
      const BatchLossReport rep = composite_loss(model, batch, cfg.loss);
      if (!std::isfinite(rep.total)) {
        res.status = RunStatus::Diverged;
        res.diagnostic = "non-finite loss at epoch " + std::to_string(e) + " step " + std::to_string(res.updates) +
                         " (" + rep.csv_row() + ")";
        res.epochs.push_back(acc);
        model.eval();
        return res;
      }
      opt.step(model);
      ++res.updates;
      acc.total += rep.total;
      acc.l_normal += rep.l_normal;
      acc.l_anomaly += rep.l_anomaly;
      acc.l_bn_explicit += rep.l_bn_explicit;
      acc.l_reg += rep.l_reg;
      ++acc.steps;
      if (cfg.record_steps) res.steps.push_back(rep);
    }
    if (acc.steps > 0) {
      const double n = static_cast<double>(acc.steps);
      acc.total /= n;
      acc.l_normal /= n;
      acc.l_anomaly /= n;
      acc.l_bn_explicit /= n;
      acc.l_reg /= n;
    }
    res.epochs.push_back(acc);
  }
  model.eval();
  return res;
}

struct EvalMetrics {
  double aucroc = std::numeric_limits<double>::quiet_NaN();
  double aucpr_anomaly = std::numeric_limits<double>::quiet_NaN();
  double aucpr_normal = std::numeric_limits<double>::quiet_NaN();
  // Normals plus only seen-type / only unseen-type anomalies. NaN when the
  // recipe does not restrict the labeled types.
  double aucroc_seen = std::numeric_limits<double>::quiet_NaN();
  double aucroc_unseen = std::numeric_limits<double>::quiet_NaN();
};

/// Eval-mode scoring of the held-out split.
inline EvalMetrics evaluate(const SSADModel& model, const SemiDataset& test_set) {
  if (test_set.split != Split::Test) throw ConfigError("evaluate() must be given the test split");
  const Vector scores = model.score_eval(test_set.read_all());
  for (double s : scores)
    if (!std::isfinite(s)) throw NumericError("evaluate: non-finite anomaly score");
  EvalMetrics m;
  ScoredSet all{scores, test_set.truth()};
  m.aucroc = aucroc(all);
  m.aucpr_anomaly = aucpr_anomaly(all);
  m.aucpr_normal = aucpr_normal(all);

  const DataRecipe& r = test_set.meta;
  if (!r.seen_types.empty() && r.seen_types.size() < r.num_types()) {
    ScoredSet seen, unseen;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const int t = test_set.truth_type[i];
      const Truth tr = t == 0 ? Truth::Normal : Truth::Anomaly;
      if (t == 0 || r.is_seen(t)) {
        seen.scores.push_back(scores[i]);
        seen.truth.push_back(tr);
      }
      if (t == 0 || !r.is_seen(t)) {
        unseen.scores.push_back(scores[i]);
        unseen.truth.push_back(tr);
      }
    }
    if (seen.count(Truth::Anomaly) > 0) m.aucroc_seen = aucroc(seen);
    if (unseen.count(Truth::Anomaly) > 0) m.aucroc_unseen = aucroc(unseen);
  }
  return m;
}

}  // namespace anoonly
