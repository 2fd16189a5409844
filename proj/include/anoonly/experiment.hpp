#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "anoonly/checkpoint.hpp"
#include "anoonly/data.hpp"
#include "anoonly/format.hpp"
#include "anoonly/training.hpp"

namespace anoonly {

// ---- config (de)serialization ---------------------------------------------

inline void to_json(nlohmann::json& j, const LossConfig& c) {
  j = {{"objective", to_string(c.objective)}, {"lambda_n", c.lambda_n}, {"lambda", c.lambda}, {"score_eps", c.score_eps}};
}
inline void from_json(const nlohmann::json& j, LossConfig& c) {
  if (j.contains("objective")) c.objective = parse_objective(j.at("objective").get<std::string>());
  c.lambda_n = j.value("lambda_n", c.lambda_n);
  c.lambda = j.value("lambda", c.lambda);
  c.score_eps = j.value("score_eps", c.score_eps);
}

inline void to_json(nlohmann::json& j, const OptimizerConfig& c) {
  j = {{"kind", c.kind == OptimizerKind::Adam ? "adam" : "sgd"},
       {"lr", c.lr},
       {"momentum", c.momentum},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"eps", c.eps}};
}
inline void from_json(const nlohmann::json& j, OptimizerConfig& c) {
  if (j.contains("kind")) {
    const auto k = j.at("kind").get<std::string>();
    if (k == "adam") c.kind = OptimizerKind::Adam;
    else if (k == "sgd") c.kind = OptimizerKind::SGD;
    else throw ConfigError("unknown optimizer '" + k + "'");
  }
  c.lr = j.value("lr", c.lr);
  c.momentum = j.value("momentum", c.momentum);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
}

inline void to_json(nlohmann::json& j, const BatcherSpec& b) {
  j = {{"batch_size", b.batch_size},
       {"strategy", b.strategy == BatchStrategy::UniformShuffle ? "uniform" : "stratified"},
       {"min_anomalies", b.min_anomalies}};
}
inline void from_json(const nlohmann::json& j, BatcherSpec& b) {
  b.batch_size = j.value("batch_size", b.batch_size);
  if (j.contains("strategy")) {
    const auto s = j.at("strategy").get<std::string>();
    if (s == "uniform") b.strategy = BatchStrategy::UniformShuffle;
    else if (s == "stratified") b.strategy = BatchStrategy::StratifiedAnomaly;
    else throw ConfigError("unknown batch strategy '" + s + "'");
  }
  b.min_anomalies = j.value("min_anomalies", b.min_anomalies);
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"optimizer", c.optimizer},
       {"batcher", c.batcher},
       {"loss", c.loss},
       {"model", c.model},
       {"zero_anomaly_policy", c.zero_anomaly_policy == ZeroAnomalyPolicy::SkipUpdate ? "skip_update" : "skip_entirely"},
       {"seed", c.seed}};
}
inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  if (j.contains("optimizer")) c.optimizer = j.at("optimizer").get<OptimizerConfig>();
  if (j.contains("batcher")) c.batcher = j.at("batcher").get<BatcherSpec>();
  if (j.contains("loss")) c.loss = j.at("loss").get<LossConfig>();
  if (j.contains("model")) c.model = j.at("model").get<ModelRecipe>();
  if (j.contains("zero_anomaly_policy")) {
    const auto p = j.at("zero_anomaly_policy").get<std::string>();
    if (p == "skip_update") c.zero_anomaly_policy = ZeroAnomalyPolicy::SkipUpdate;
    else if (p == "skip_entirely") c.zero_anomaly_policy = ZeroAnomalyPolicy::SkipEntirely;
    else throw ConfigError("unknown zero_anomaly_policy '" + p + "'");
  }
  c.seed = j.value("seed", c.seed);
}

// ---- experiment description -----------------------------------------------

enum class SweepAxis { None, GammaLa, GammaN, LambdaN, BatchSize, Normalizer, Noise, SeenTypes };

inline std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::None: return "none";
    case SweepAxis::GammaLa: return "gamma_la";
    case SweepAxis::GammaN: return "gamma_n";
    case SweepAxis::LambdaN: return "lambda_n";
    case SweepAxis::BatchSize: return "batch_size";
    case SweepAxis::Normalizer: return "normalizer";
    case SweepAxis::Noise: return "noise";
    case SweepAxis::SeenTypes: return "seen_types";
  }
  return "?";
}

inline SweepAxis parse_sweep_axis(const std::string& s) {
  for (auto a : {SweepAxis::None, SweepAxis::GammaLa, SweepAxis::GammaN, SweepAxis::LambdaN, SweepAxis::BatchSize,
                 SweepAxis::Normalizer, SweepAxis::Noise, SweepAxis::SeenTypes})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

/// Standard grid for each axis.
inline std::vector<std::string> default_sweep_values(SweepAxis a) {
  switch (a) {
    case SweepAxis::None: return {""};
    case SweepAxis::GammaLa: return {"0.01", "0.05", "0.1", "0.25", "0.5", "0.75", "1"};
    case SweepAxis::GammaN: return {"0.05", "0.1", "0.2", "0.5", "1"};
    case SweepAxis::LambdaN: return {"1", "0.01", "0.0001", "1e-06", "0"};
    case SweepAxis::BatchSize: return {"1", "2", "4", "8", "16", "32", "64", "128"};
    case SweepAxis::Normalizer: return {"none", "ln", "bn_star", "bn", "bn_dagger"};
    case SweepAxis::Noise: return {"contaminated", "clean"};
    case SweepAxis::SeenTypes: return {"1", "3", "5"};
  }
  return {};
}

struct ExperimentConfig {
  std::string name = "experiment";
  DataRecipe data;
  TrainConfig train;
  SweepAxis axis = SweepAxis::None;
  std::vector<std::string> values{""};
  std::size_t repeats = 5;
  std::uint64_t seed = 0;   // repeat r runs with seed + r
  std::string output_path;  // directory; empty disables file output
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"name", c.name},
       {"data", c.data},
       {"train", c.train},
       {"sweep", {{"axis", to_string(c.axis)}, {"values", c.values}}},
       {"repeats", c.repeats},
       {"seed", c.seed},
       {"output_path", c.output_path}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c.name = j.value("name", c.name);
  if (j.contains("data")) c.data = j.at("data").get<DataRecipe>();
  if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    c.axis = parse_sweep_axis(s.value("axis", std::string("none")));
    c.values.clear();
    if (s.contains("values")) {
      for (const auto& v : s.at("values")) c.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      c.values = default_sweep_values(c.axis);
    }
  }
  c.repeats = j.value("repeats", c.repeats);
  c.seed = j.value("seed", c.seed);
  c.output_path = j.value("output_path", c.output_path);
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  return nlohmann::json::parse(is).get<ExperimentConfig>();
}

/// One fully-resolved training run.
struct RunSpec {
  DataRecipe data;
  TrainConfig train;
  std::string value;
  std::size_t value_index = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Hash of the canonical JSON of a run; keys resumption.
inline std::string config_hash(const RunSpec& r) {
  const nlohmann::json j = {{"data", r.data}, {"train", r.train}};
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

inline void apply_sweep_value(SweepAxis axis, const std::string& v, DataRecipe& data, TrainConfig& train) {
  switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::GammaLa: data.gamma_la = parse_double(v); break;
    case SweepAxis::GammaN: data.gamma_n = parse_double(v); break;
    case SweepAxis::LambdaN:
      train.loss.objective = Objective::Reweighted;
      train.loss.lambda_n = parse_double(v);
      break;
    case SweepAxis::BatchSize: {
      const auto b = parse_int(v);
      if (b < 1) throw ConfigError("batch size must be >= 1");
      train.batcher.batch_size = static_cast<std::size_t>(b);
      break;
    }
    case SweepAxis::Normalizer:
      if (v == "bn_dagger") {
        train.model.normalizer = NormalizerKind::none();
        train.loss.objective = Objective::AnoOnlyExplicitBN;
      } else {
        train.model.normalizer = NormalizerKind::parse(v);
      }
      break;
    case SweepAxis::Noise:
      if (v == "contaminated") data.contamination = true;
      else if (v == "clean") data.contamination = false;
      else throw ConfigError("noise value must be 'contaminated' or 'clean'");
      break;
    case SweepAxis::SeenTypes: {
      const auto k = parse_int(v);
      if (k < 1 || static_cast<std::size_t>(k) > data.num_types()) throw ConfigError("seen_types count out of range");
      data.seen_types.clear();
      for (int t = 1; t <= k; ++t) data.seen_types.push_back(t);
      break;
    }
  }
}

/// Sweep values outer, repeats inner.
inline std::vector<RunSpec> plan_runs(const ExperimentConfig& cfg) {
  if (cfg.repeats == 0) throw ConfigError("repeats must be >= 1");
  if (cfg.values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<RunSpec> out;
  for (std::size_t vi = 0; vi < cfg.values.size(); ++vi) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      RunSpec s{cfg.data, cfg.train, cfg.values[vi], vi, r, cfg.seed + r};
      apply_sweep_value(cfg.axis, cfg.values[vi], s.data, s.train);
      s.data.seed = s.seed;
      s.train.seed = s.seed;
      s.train.model.seed = s.seed;
      s.train.model.input_dim = s.data.d;
      s.data.validate();
      s.train.validate();
      out.push_back(std::move(s));
    }
  }
  return out;
}

struct RunRecord {
  std::string config_hash;
  std::string axis;
  std::string value;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::Ok;
  std::string message;
  EvalMetrics metrics;
  std::size_t updates = 0;
  std::size_t skipped_batches = 0;
  std::vector<EpochLoss> epochs;
  double wall_time_s = 0.0;
};

/// Generates data, trains on the train split and scores the test split.
/// Failures are captured in the record. A non-empty checkpoint_dir receives
/// <config_hash>.json for every successful run.
inline RunRecord execute_run(const RunSpec& spec, SweepAxis axis, const std::string& checkpoint_dir = "") {
  RunRecord rec;
  rec.config_hash = config_hash(spec);
  rec.axis = to_string(axis);
  rec.value = spec.value;
  rec.repeat = spec.repeat;
  rec.seed = spec.seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const GeneratedData data = generate(spec.data);
    TrainResult tr = train(data.train, spec.train);
    rec.updates = tr.updates;
    rec.skipped_batches = tr.skipped_batches;
    rec.epochs = tr.epochs;
    rec.status = tr.status;
    rec.message = tr.diagnostic;
    if (tr.status == RunStatus::Ok) {
      rec.metrics = evaluate(tr.model, data.test);
      if (!checkpoint_dir.empty()) {
        std::filesystem::create_directories(checkpoint_dir);
        save_checkpoint((std::filesystem::path(checkpoint_dir) / (rec.config_hash + ".json")).string(), tr.model);
      }
    }
  } catch (const std::exception& e) {
    rec.status = RunStatus::Failed;
    rec.message = e.what();
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// ---- result files ---------------------------------------------------------

namespace detail {

inline std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

inline const char* kRunsCsvHeader =
    "name,config_hash,axis,value,repeat,seed,status,aucroc,aucpr_anomaly,aucpr_normal,aucroc_seen,aucroc_unseen,"
    "updates,skipped_batches,message";
inline const char* kTraceCsvHeader = "config_hash,epoch,steps,total,l_normal,l_anomaly,l_bn_explicit,l_reg";

inline void write_runs_csv(std::ostream& os, const std::string& name, const std::vector<RunRecord>& runs) {
  os << kRunsCsvHeader << '\n';
  for (const auto& r : runs) {
    const auto& m = r.metrics;
    os << detail::csv_safe(name) << ',' << r.config_hash << ',' << r.axis << ',' << detail::csv_safe(r.value) << ','
       << r.repeat << ',' << r.seed << ',' << to_string(r.status) << ',' << format_double(m.aucroc) << ','
       << format_double(m.aucpr_anomaly) << ',' << format_double(m.aucpr_normal) << ','
       << format_double(m.aucroc_seen) << ',' << format_double(m.aucroc_unseen) << ',' << r.updates << ','
       << r.skipped_batches << ',' << detail::csv_safe(r.message) << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, const std::vector<RunRecord>& runs) {
  os << kTraceCsvHeader << '\n';
  for (const auto& r : runs)
    for (std::size_t e = 0; e < r.epochs.size(); ++e) {
      const auto& l = r.epochs[e];
      os << r.config_hash << ',' << e << ',' << l.steps << ',' << format_double(l.total) << ','
         << format_double(l.l_normal) << ',' << format_double(l.l_anomaly) << ',' << format_double(l.l_bn_explicit)
         << ',' << format_double(l.l_reg) << '\n';
    }
}

/// Completed runs from an earlier invocation, keyed by config hash.
inline std::map<std::string, RunRecord> read_previous_runs(const std::filesystem::path& runs_csv,
                                                          const std::filesystem::path& trace_csv) {
  std::map<std::string, RunRecord> out;
  std::ifstream is(runs_csv);
  if (!is) return out;
  std::string line;
  if (!std::getline(is, line) || line != kRunsCsvHeader) return out;
  while (std::getline(is, line)) {
    auto c = detail::split_csv_line(line);
    if (c.size() != 15) continue;
    RunRecord r;
    r.config_hash = c[1];
    r.axis = c[2];
    r.value = c[3];
    r.repeat = static_cast<std::size_t>(parse_int(c[4]));
    r.seed = std::stoull(c[5]);
    r.status = parse_run_status(c[6]);
    r.metrics = {parse_double(c[7]), parse_double(c[8]), parse_double(c[9]), parse_double(c[10]),
                 parse_double(c[11])};
    r.updates = static_cast<std::size_t>(parse_int(c[12]));
    r.skipped_batches = static_cast<std::size_t>(parse_int(c[13]));
    r.message = c[14];
    if (r.status == RunStatus::Ok) out[r.config_hash] = r;
  }
  std::ifstream ts(trace_csv);
  if (ts && std::getline(ts, line) && line == kTraceCsvHeader) {
    while (std::getline(ts, line)) {
      auto c = detail::split_csv_line(line);
      if (c.size() != 8) continue;
      auto it = out.find(c[0]);
      if (it == out.end()) continue;
      EpochLoss l{parse_double(c[3]), parse_double(c[4]), parse_double(c[5]), parse_double(c[6]),
                  parse_double(c[7]), static_cast<std::size_t>(parse_int(c[2]))};
      it->second.epochs.push_back(l);
    }
  }
  return out;
}

struct SweepPointSummary {
  std::string value;
  std::size_t n_runs = 0;
  std::size_t n_ok = 0;
  double mean_aucroc = std::nan("");
  double std_aucroc = std::nan("");
  double mean_aucpr_anomaly = std::nan("");
  double mean_aucpr_normal = std::nan("");
  double mean_aucroc_seen = std::nan("");
  double mean_aucroc_unseen = std::nan("");
};

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::vector<SweepPointSummary> summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& runs) {
  std::vector<SweepPointSummary> out;
  for (const auto& v : cfg.values) {
    SweepPointSummary s;
    s.value = v;
    std::vector<double> roc, pra, prn, seen, unseen;
    for (const auto& r : runs) {
      if (r.value != v) continue;
      ++s.n_runs;
      if (r.status != RunStatus::Ok) continue;
      ++s.n_ok;
      roc.push_back(r.metrics.aucroc);
      pra.push_back(r.metrics.aucpr_anomaly);
      prn.push_back(r.metrics.aucpr_normal);
      if (std::isfinite(r.metrics.aucroc_seen)) seen.push_back(r.metrics.aucroc_seen);
      if (std::isfinite(r.metrics.aucroc_unseen)) unseen.push_back(r.metrics.aucroc_unseen);
    }
    s.mean_aucroc = mean_of(roc);
    if (!roc.empty()) {
      double ss = 0.0;
      for (double x : roc) ss += (x - s.mean_aucroc) * (x - s.mean_aucroc);
      s.std_aucroc = std::sqrt(ss / static_cast<double>(roc.size()));
    }
    s.mean_aucpr_anomaly = mean_of(pra);
    s.mean_aucpr_normal = mean_of(prn);
    s.mean_aucroc_seen = mean_of(seen);
    s.mean_aucroc_unseen = mean_of(unseen);
    out.push_back(s);
  }
  return out;
}

inline std::size_t worker_count() {
  if (const char* env = std::getenv("ANOONLY_WORKERS")) {
    try {
      const auto n = parse_int(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const ConfigError&) {
    }
  }
  return 1;
}

struct ExperimentOptions {
  std::size_t workers = 0;  // 0: ANOONLY_WORKERS or 1
  bool resume = true;
  std::string checkpoint_dir;
};

/// Runs the full sweep x repeats grid. Independent runs go to a worker pool;
/// records are collected in plan order, so output does not depend on the
/// worker count. With an output_path, writes <name>_runs.csv,
/// <name>_trace.csv, <name>_curve.dat and <name>_aggregate.json, reusing
/// completed runs found in an existing <name>_runs.csv.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, ExperimentOptions opts = {}) {
  const auto plan = plan_runs(cfg);
  std::vector<RunRecord> records(plan.size());
  std::vector<bool> done(plan.size(), false);

  namespace fs = std::filesystem;
  const bool write = !cfg.output_path.empty();
  const fs::path dir(cfg.output_path);
  const fs::path runs_csv = dir / (cfg.name + "_runs.csv");
  const fs::path trace_csv = dir / (cfg.name + "_trace.csv");
  if (write && opts.resume) {
    const auto prev = read_previous_runs(runs_csv, trace_csv);
    for (std::size_t i = 0; i < plan.size(); ++i) {
      auto it = prev.find(config_hash(plan[i]));
      if (it != prev.end() && it->second.value == plan[i].value && it->second.repeat == plan[i].repeat) {
        records[i] = it->second;
        done[i] = true;
      }
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      if (!done[i]) records[i] = execute_run(plan[i], cfg.axis, opts.checkpoint_dir);
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, opts.workers ? opts.workers : worker_count());
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(n_workers, plan.size()); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (write) {
    fs::create_directories(dir);
    {
      std::ofstream os(runs_csv);
      if (!os) throw ConfigError("cannot write " + runs_csv.string());
      write_runs_csv(os, cfg.name, records);
    }
    {
      std::ofstream os(trace_csv);
      write_trace_csv(os, records);
    }
    const auto summary = summarize(cfg, records);
    {
      std::ofstream os(dir / (cfg.name + "_curve.dat"));
      os << "# " << to_string(cfg.axis)
         << " mean_aucroc std_aucroc mean_aucpr_anomaly mean_aucpr_normal mean_aucroc_seen mean_aucroc_unseen n_ok\n";
      for (const auto& s : summary) {
        os << (s.value.empty() ? "-" : s.value) << ' ' << format_double(s.mean_aucroc) << ' '
           << format_double(s.std_aucroc) << ' ' << format_double(s.mean_aucpr_anomaly) << ' '
           << format_double(s.mean_aucpr_normal) << ' ' << format_double(s.mean_aucroc_seen) << ' '
           << format_double(s.mean_aucroc_unseen) << ' ' << s.n_ok << '\n';
      }
    }
    nlohmann::json points = nlohmann::json::array();
    for (const auto& s : summary) {
      auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
      points.push_back({{"value", s.value},
                        {"n_runs", s.n_runs},
                        {"n_ok", s.n_ok},
                        {"mean_aucroc", num(s.mean_aucroc)},
                        {"std_aucroc", num(s.std_aucroc)},
                        {"mean_aucpr_anomaly", num(s.mean_aucpr_anomaly)},
                        {"mean_aucpr_normal", num(s.mean_aucpr_normal)},
                        {"mean_aucroc_seen", num(s.mean_aucroc_seen)},
                        {"mean_aucroc_unseen", num(s.mean_aucroc_unseen)}});
    }
    double run_time = 0.0;
    for (const auto& r : records) run_time += r.wall_time_s;
    nlohmann::json agg = {{"name", cfg.name}, {"config", cfg},          {"axis", to_string(cfg.axis)},
                          {"points", points}, {"wall_time_s", wall},    {"summed_run_time_s", run_time},
                          {"workers", n_workers}};
    std::ofstream os(dir / (cfg.name + "_aggregate.json"));
    os << agg.dump(2) << '\n';
  }
  return records;
}

// ---- paired comparison ----------------------------------------------------

struct ComparisonRow {
  std::string value;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double aucroc_a = 0.0;
  double aucroc_b = 0.0;
  double delta_aucroc = 0.0;  // b - a
  double delta_aucpr_anomaly = 0.0;
  double delta_aucpr_normal = 0.0;
};

struct ComparisonSummary {
  std::size_t n_pairs = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_zero = 0;
  double mean_delta_aucroc = 0.0;
  double sign_test_p = 1.0;  // two-sided, ties dropped
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  ComparisonSummary summary;
};

/// Two-sided exact sign test p-value.
inline double sign_test_p(std::size_t n_pos, std::size_t n_neg) {
  const std::size_t n = n_pos + n_neg;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(n_pos, n_neg);
  double tail = 0.0;
  double log_half_n = static_cast<double>(n) * std::log(0.5);
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_c = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                         std::lgamma(static_cast<double>(n - i) + 1.0);
    tail += std::exp(log_c + log_half_n);
  }
  return std::min(1.0, 2.0 * tail);
}

inline Comparison compare_records(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b) {
  if (a.size() != b.size()) throw ConfigError("compare: run grids differ in size");
  Comparison c;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].seed != b[i].seed || a[i].repeat != b[i].repeat) throw ConfigError("compare: mismatched seeds");
    ComparisonRow r{a[i].value, a[i].repeat, a[i].seed, a[i].metrics.aucroc, b[i].metrics.aucroc,
                    b[i].metrics.aucroc - a[i].metrics.aucroc,
                    b[i].metrics.aucpr_anomaly - a[i].metrics.aucpr_anomaly,
                    b[i].metrics.aucpr_normal - a[i].metrics.aucpr_normal};
    if (r.delta_aucroc > 0.0) ++c.summary.n_positive;
    else if (r.delta_aucroc < 0.0) ++c.summary.n_negative;
    else if (r.delta_aucroc == 0.0) ++c.summary.n_zero;
    if (std::isfinite(r.delta_aucroc)) sum += r.delta_aucroc;
    c.rows.push_back(r);
  }
  c.summary.n_pairs = c.rows.size();
  const std::size_t finite = c.summary.n_positive + c.summary.n_negative + c.summary.n_zero;
  c.summary.mean_delta_aucroc = finite ? sum / static_cast<double>(finite) : std::nan("");
  c.summary.sign_test_p = sign_test_p(c.summary.n_positive, c.summary.n_negative);
  return c;
}

/// Paired per-seed comparison of variant against baseline (delta = variant -
/// baseline). Both configs must share seed, repeats and sweep grid.
inline Comparison compare(const ExperimentConfig& baseline, const ExperimentConfig& variant,
                          ExperimentOptions opts = {}) {
  if (baseline.seed != variant.seed || baseline.repeats != variant.repeats) {
    throw ConfigError("compare: configs must share seed and repeats");
  }
  if (baseline.values.size() != variant.values.size()) throw ConfigError("compare: sweep grids differ");
  return compare_records(run_experiment(baseline, opts), run_experiment(variant, opts));
}

inline void write_comparison_csv(std::ostream& os, const Comparison& c) {
  os << "value,repeat,seed,aucroc_a,aucroc_b,delta_aucroc,delta_aucpr_anomaly,delta_aucpr_normal\n";
  for (const auto& r : c.rows) {
    os << detail::csv_safe(r.value) << ',' << r.repeat << ',' << r.seed << ',' << format_double(r.aucroc_a) << ','
       << format_double(r.aucroc_b) << ',' << format_double(r.delta_aucroc) << ','
       << format_double(r.delta_aucpr_anomaly) << ',' << format_double(r.delta_aucpr_normal) << '\n';
  }
}

}  // namespace anoonly
