#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "anoonly/format.hpp"
#include "anoonly/losses.hpp"
#include "anoonly/matrix.hpp"
#include "anoonly/metrics.hpp"
#include "anoonly/random.hpp"

namespace anoonly {

/// floor(x + 0.5). Every ratio-derived count goes through this.
inline std::size_t round_half_up(double x) {
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

enum class AnomalyKind { Cluster, Shell, Box };

inline std::string to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::Cluster: return "cluster";
    case AnomalyKind::Shell: return "shell";
    case AnomalyKind::Box: return "box";
  }
  return "?";
}

inline AnomalyKind parse_anomaly_kind(const std::string& s) {
  if (s == "cluster") return AnomalyKind::Cluster;
  if (s == "shell" || s == "ring") return AnomalyKind::Shell;
  if (s == "box" || s == "uniform-box") return AnomalyKind::Box;
  throw ConfigError("unknown anomaly kind '" + s + "'");
}

/// One anomaly generator.
///  cluster: Gaussian blob (std `spread`) centred `offset` away from a
///           normal cluster centre along a random direction.
///  shell:   points at radius U(offset - spread, offset + spread) around the
///           normal mean.
///  box:     uniform in the cube normal_mean +- offset.
struct AnomalyTypeSpec {
  AnomalyKind kind = AnomalyKind::Cluster;
  double offset = 4.0;
  double spread = 1.0;
  friend bool operator==(const AnomalyTypeSpec&, const AnomalyTypeSpec&) = default;
};

/// Three off-manifold clusters, a shell enclosing the whole normal mixture
/// and a wide box. The shell and box surround the normals instead of
/// overlapping them, so every type is separable in principle.
inline std::vector<AnomalyTypeSpec> default_anomaly_types() {
  return {
      {AnomalyKind::Cluster, 6.0, 1.0},
      {AnomalyKind::Cluster, 6.0, 1.0},
      {AnomalyKind::Shell, 14.0, 1.0},
      {AnomalyKind::Cluster, 6.0, 1.0},
      {AnomalyKind::Box, 8.0, 0.0},
  };
}

struct DataRecipe {
  std::size_t d = 16;
  std::size_t n_total = 2000;
  double anomaly_ratio = 0.05;
  std::size_t normal_clusters = 3;
  double normal_spread = 1.0;
  double cluster_separation = 3.0;
  std::vector<AnomalyTypeSpec> anomaly_types = default_anomaly_types();
  std::vector<int> seen_types;  // 1-based; empty means every type
  double gamma_la = 0.1;
  double gamma_n = 1.0;
  bool contamination = true;  // unlabeled train anomalies stay in D_U
  double train_frac = 0.7;
  std::uint64_t seed = 0;

  std::size_t num_types() const { return anomaly_types.size(); }

  bool is_seen(int type_id) const {
    if (seen_types.empty()) return true;
    return std::find(seen_types.begin(), seen_types.end(), type_id) != seen_types.end();
  }

  void validate() const {
    if (d == 0) throw ConfigError("d must be >= 1");
    if (n_total == 0) throw ConfigError("n_total must be >= 1");
    if (!(anomaly_ratio >= 0.0 && anomaly_ratio < 1.0)) throw ConfigError("anomaly_ratio must be in [0,1)");
    if (normal_clusters == 0) throw ConfigError("normal_clusters must be >= 1");
    if (!(normal_spread > 0.0)) throw ConfigError("normal_spread must be > 0");
    if (anomaly_types.empty()) throw ConfigError("need at least one anomaly type");
    for (int t : seen_types)
      if (t < 1 || static_cast<std::size_t>(t) > anomaly_types.size())
        throw ConfigError("seen type " + std::to_string(t) + " outside 1.." + std::to_string(anomaly_types.size()));
    if (!(gamma_la > 0.0 && gamma_la <= 1.0)) throw ConfigError("gamma_la must be in (0,1]");
    if (!(gamma_n > 0.0 && gamma_n <= 1.0)) throw ConfigError("gamma_n must be in (0,1]");
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac must be in (0,1)");
  }
};

enum class Split { Train, Test };

/// Feature matrix with semi-supervised labels and hidden ground truth.
/// truth_type is 0 for normal rows and the 1-based anomaly type otherwise.
struct SemiDataset {
  Matrix features;
  std::vector<TrainLabel> train_label;
  std::vector<int> truth_type;
  DataRecipe meta;
  Split split = Split::Train;

  std::size_t size() const noexcept { return features.rows(); }
  bool is_anomaly(std::size_t i) const { return truth_type[i] != 0; }

  std::size_t count_label(TrainLabel l) const {
    return static_cast<std::size_t>(std::count(train_label.begin(), train_label.end(), l));
  }
  std::size_t count_anomalies() const {
    return static_cast<std::size_t>(std::count_if(truth_type.begin(), truth_type.end(), [](int t) { return t != 0; }));
  }

  std::vector<Truth> truth() const {
    std::vector<Truth> t(truth_type.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = truth_type[i] != 0 ? Truth::Anomaly : Truth::Normal;
    return t;
  }

  /// Copies the listed rows; every row read is counted.
  LabeledBatch gather(std::span<const std::size_t> idx) const {
    note_reads(idx.size());
    LabeledBatch b{select_rows(features, idx), {}};
    b.labels.reserve(idx.size());
    for (auto i : idx) b.labels.push_back(train_label[i]);
    return b;
  }

  /// Whole feature matrix, counted as reading every row.
  const Matrix& read_all() const {
    note_reads(size());
    return features;
  }

  SemiDataset subset(std::span<const std::size_t> idx) const {
    SemiDataset out;
    out.features = select_rows(features, idx);
    for (auto i : idx) {
      out.train_label.push_back(train_label[i]);
      out.truth_type.push_back(truth_type[i]);
    }
    out.meta = meta;
    out.split = split;
    return out;
  }

  std::size_t rows_read() const { return reads_->load(); }
  void reset_reads() const { reads_->store(0); }

  friend bool operator==(const SemiDataset& a, const SemiDataset& b) {
    return a.features == b.features && a.train_label == b.train_label && a.truth_type == b.truth_type &&
           a.split == b.split;
  }

 private:
  void note_reads(std::size_t n) const { reads_->fetch_add(n, std::memory_order_relaxed); }
  std::shared_ptr<std::atomic<std::size_t>> reads_ = std::make_shared<std::atomic<std::size_t>>(0);
};

struct GeneratedData {
  SemiDataset train;
  SemiDataset test;
};

namespace detail {

inline std::vector<double> random_unit(Rng& rng, std::size_t d) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> u(d);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& v : u) {
      v = g(rng);
      n2 += v * v;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& v : u) v *= inv;
  return u;
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  std::shuffle(v.begin(), v.end(), rng);
}

}  // namespace detail

/// Keeps round(gamma_n * #unlabeled normals) normal rows chosen by a seeded
/// permutation prefix (so smaller ratios keep subsets of larger ones) and
/// every anomaly row. Row order is preserved.
inline SemiDataset subsample_normal(const SemiDataset& ds, double gamma_n, std::uint64_t seed) {
  if (!(gamma_n > 0.0 && gamma_n <= 1.0)) throw ConfigError("gamma_n must be in (0,1]");
  std::vector<std::size_t> normals;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!ds.is_anomaly(i) && ds.train_label[i] == TrainLabel::Unlabeled) normals.push_back(i);
  const std::size_t keep = round_half_up(gamma_n * static_cast<double>(normals.size()));
  if (keep == 0 && !normals.empty()) throw ConfigError("subsample_normal: gamma_n keeps no normal rows");

  Rng rng = make_rng(seed, 0x6e6f726dULL);
  std::vector<std::size_t> perm(normals.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  detail::shuffle_in_place(perm, rng);
  std::vector<bool> kept(ds.size(), true);
  for (std::size_t k = keep; k < perm.size(); ++k) kept[normals[perm[k]]] = false;

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (kept[i]) idx.push_back(i);
  SemiDataset out = ds.subset(idx);
  out.meta.gamma_n = ds.meta.gamma_n * gamma_n;
  return out;
}

/// Drops anomalies hiding in the unlabeled set. Labeled anomalies stay.
inline SemiDataset decontaminate(const SemiDataset& ds) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!(ds.is_anomaly(i) && ds.train_label[i] == TrainLabel::Unlabeled)) idx.push_back(i);
  SemiDataset out = ds.subset(idx);
  out.meta.contamination = false;
  return out;
}

/// Synthetic train/test pair. Normals come from a Gaussian mixture, anomalies
/// from the recipe's type generators assigned round-robin. Normals and
/// anomalies are split separately so both splits keep the same ratio.
inline GeneratedData generate(const DataRecipe& recipe) {
  recipe.validate();
  Rng rng = make_rng(recipe.seed, 0x64617461ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t d = recipe.d;

  const std::size_t n_anom = round_half_up(recipe.anomaly_ratio * static_cast<double>(recipe.n_total));
  const std::size_t n_norm = recipe.n_total - n_anom;
  const std::size_t n_anom_train = round_half_up(recipe.train_frac * static_cast<double>(n_anom));
  const std::size_t n_norm_train = round_half_up(recipe.train_frac * static_cast<double>(n_norm));
  const std::size_t n_labeled = round_half_up(recipe.gamma_la * static_cast<double>(n_anom_train));
  if (n_labeled == 0) {
    throw ConfigError("recipe yields no labeled anomalies (" + std::to_string(n_anom_train) +
                      " train anomalies at gamma_la " + format_double(recipe.gamma_la) + ")");
  }

  std::vector<std::vector<double>> centers(recipe.normal_clusters, std::vector<double>(d));
  for (auto& c : centers)
    for (auto& v : c) v = recipe.cluster_separation * gauss(rng);
  std::vector<double> normal_mean(d, 0.0);
  for (const auto& c : centers)
    for (std::size_t j = 0; j < d; ++j) normal_mean[j] += c[j] / static_cast<double>(centers.size());

  struct TypeGeometry {
    std::vector<double> center;
  };
  std::vector<TypeGeometry> geo;
  for (std::size_t t = 0; t < recipe.num_types(); ++t) {
    const auto& spec = recipe.anomaly_types[t];
    TypeGeometry g;
    if (spec.kind == AnomalyKind::Cluster) {
      const auto& base = centers[t % centers.size()];
      auto u = detail::random_unit(rng, d);
      g.center.resize(d);
      for (std::size_t j = 0; j < d; ++j) g.center[j] = base[j] + spec.offset * u[j];
    }
    geo.push_back(std::move(g));
  }

  Matrix x(recipe.n_total, d);
  std::vector<int> type(recipe.n_total, 0);
  for (std::size_t i = 0; i < n_norm; ++i) {
    const auto& c = centers[i % centers.size()];
    for (std::size_t j = 0; j < d; ++j) x(i, j) = c[j] + recipe.normal_spread * gauss(rng);
  }
  for (std::size_t a = 0; a < n_anom; ++a) {
    const std::size_t i = n_norm + a;
    const std::size_t t = a % recipe.num_types();
    const auto& spec = recipe.anomaly_types[t];
    type[i] = static_cast<int>(t) + 1;
    switch (spec.kind) {
      case AnomalyKind::Cluster:
        for (std::size_t j = 0; j < d; ++j) x(i, j) = geo[t].center[j] + spec.spread * gauss(rng);
        break;
      case AnomalyKind::Shell: {
        std::uniform_real_distribution<double> r(spec.offset - spec.spread, spec.offset + spec.spread);
        const double radius = r(rng);
        auto u = detail::random_unit(rng, d);
        for (std::size_t j = 0; j < d; ++j) x(i, j) = normal_mean[j] + radius * u[j];
        break;
      }
      case AnomalyKind::Box: {
        std::uniform_real_distribution<double> box(-spec.offset, spec.offset);
        for (std::size_t j = 0; j < d; ++j) x(i, j) = normal_mean[j] + box(rng);
        break;
      }
    }
  }

  std::vector<std::size_t> norm_idx(n_norm), anom_idx(n_anom);
  std::iota(norm_idx.begin(), norm_idx.end(), std::size_t{0});
  std::iota(anom_idx.begin(), anom_idx.end(), n_norm);
  detail::shuffle_in_place(norm_idx, rng);
  detail::shuffle_in_place(anom_idx, rng);

  std::vector<std::size_t> train_rows(norm_idx.begin(), norm_idx.begin() + n_norm_train);
  std::vector<std::size_t> test_rows(norm_idx.begin() + n_norm_train, norm_idx.end());
  std::vector<std::size_t> train_anoms(anom_idx.begin(), anom_idx.begin() + n_anom_train);
  test_rows.insert(test_rows.end(), anom_idx.begin() + n_anom_train, anom_idx.end());

  // Labeled anomalies come only from seen types; anom_idx is already shuffled.
  std::vector<bool> labeled(recipe.n_total, false);
  std::size_t n_marked = 0;
  for (auto i : train_anoms) {
    if (n_marked == n_labeled) break;
    if (recipe.is_seen(type[i])) {
      labeled[i] = true;
      ++n_marked;
    }
  }
  if (n_marked < n_labeled) {
    throw ConfigError("only " + std::to_string(n_marked) + " seen-type train anomalies for " +
                      std::to_string(n_labeled) + " labels");
  }
  for (auto i : train_anoms)
    if (labeled[i] || recipe.contamination) train_rows.push_back(i);

  // Test order is drawn first so it does not depend on the contamination flag.
  detail::shuffle_in_place(test_rows, rng);
  detail::shuffle_in_place(train_rows, rng);

  auto build = [&](const std::vector<std::size_t>& rows, Split split) {
    SemiDataset ds;
    ds.features = select_rows(x, rows);
    for (auto i : rows) {
      ds.train_label.push_back(labeled[i] ? TrainLabel::LabeledAnomaly : TrainLabel::Unlabeled);
      ds.truth_type.push_back(type[i]);
    }
    ds.meta = recipe;
    ds.split = split;
    return ds;
  };
  GeneratedData out{build(train_rows, Split::Train), build(test_rows, Split::Test)};
  // Test labels carry no supervision.
  std::fill(out.test.train_label.begin(), out.test.train_label.end(), TrainLabel::Unlabeled);
  if (recipe.gamma_n < 1.0) {
    out.train = subsample_normal(out.train, recipe.gamma_n, recipe.seed);
    out.train.meta.gamma_n = recipe.gamma_n;
  }
  return out;
}

enum class BatchStrategy { UniformShuffle, StratifiedAnomaly };

struct BatcherSpec {
  std::size_t batch_size = 32;
  BatchStrategy strategy = BatchStrategy::UniformShuffle;
  std::size_t min_anomalies = 1;
};

/// Mini-batch sampler. Each epoch shuffles the dataset and cuts it into
/// ceil(n / b) consecutive batches. The stratified strategy then tops up any
/// batch holding fewer than min_anomalies labeled anomalies by overwriting
/// its trailing unlabeled rows with labeled anomalies drawn with replacement.
class Batcher {
 public:
  Batcher(BatcherSpec spec, std::uint64_t seed) : spec_(spec), rng_(make_rng(seed, 0x6261746368ULL)) {
    if (spec_.batch_size == 0) throw ConfigError("batch size must be >= 1");
  }

  const BatcherSpec& spec() const noexcept { return spec_; }

  std::size_t batches_per_epoch(std::size_t n) const { return (n + spec_.batch_size - 1) / spec_.batch_size; }

  /// Row indices of every batch of one epoch.
  std::vector<std::vector<std::size_t>> epoch(const SemiDataset& ds) {
    check(ds);
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    detail::shuffle_in_place(perm, rng_);

    std::vector<std::size_t> labeled;
    if (spec_.strategy == BatchStrategy::StratifiedAnomaly) {
      for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.train_label[i] == TrainLabel::LabeledAnomaly) labeled.push_back(i);
      if (labeled.empty() && spec_.min_anomalies > 0) {
        throw ConfigError("stratified batching needs at least one labeled anomaly");
      }
    }

    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < perm.size(); start += spec_.batch_size) {
      const std::size_t end = std::min(perm.size(), start + spec_.batch_size);
      std::vector<std::size_t> batch(perm.begin() + start, perm.begin() + end);
      if (spec_.strategy == BatchStrategy::StratifiedAnomaly) top_up(batch, ds, labeled);
      out.push_back(std::move(batch));
    }
    return out;
  }

  /// Next batch, starting a fresh epoch whenever the current one is used up.
  LabeledBatch next_batch(const SemiDataset& ds) {
    if (cursor_ >= plan_.size()) {
      plan_ = epoch(ds);
      cursor_ = 0;
    }
    return ds.gather(plan_[cursor_++]);
  }

 private:
  void check(const SemiDataset& ds) const {
    if (ds.size() == 0) throw ConfigError("cannot batch an empty dataset");
    if (spec_.batch_size > ds.size()) {
      throw ConfigError("batch size " + std::to_string(spec_.batch_size) + " exceeds dataset size " +
                        std::to_string(ds.size()));
    }
  }

  void top_up(std::vector<std::size_t>& batch, const SemiDataset& ds, const std::vector<std::size_t>& labeled) {
    std::size_t have = 0;
    for (auto i : batch) have += ds.train_label[i] == TrainLabel::LabeledAnomaly ? 1 : 0;
    std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
    for (std::size_t k = batch.size(); k-- > 0 && have < spec_.min_anomalies;) {
      if (ds.train_label[batch[k]] == TrainLabel::LabeledAnomaly) continue;
      batch[k] = labeled[pick(rng_)];
      ++have;
    }
  }

  BatcherSpec spec_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> plan_;
  std::size_t cursor_ = 0;
};

// ---- serialization -------------------------------------------------------

inline void to_json(nlohmann::json& j, const AnomalyTypeSpec& t) {
  j = {{"kind", to_string(t.kind)}, {"offset", t.offset}, {"spread", t.spread}};
}
inline void from_json(const nlohmann::json& j, AnomalyTypeSpec& t) {
  t.kind = parse_anomaly_kind(j.at("kind").get<std::string>());
  t.offset = j.value("offset", t.offset);
  t.spread = j.value("spread", t.spread);
}

inline void to_json(nlohmann::json& j, const DataRecipe& r) {
  j = {{"d", r.d},
       {"n_total", r.n_total},
       {"anomaly_ratio", r.anomaly_ratio},
       {"normal_clusters", r.normal_clusters},
       {"normal_spread", r.normal_spread},
       {"cluster_separation", r.cluster_separation},
       {"anomaly_types", r.anomaly_types},
       {"seen_types", r.seen_types},
       {"gamma_la", r.gamma_la},
       {"gamma_n", r.gamma_n},
       {"contamination", r.contamination},
       {"train_frac", r.train_frac},
       {"seed", r.seed}};
}
inline void from_json(const nlohmann::json& j, DataRecipe& r) {
  r.d = j.value("d", r.d);
  r.n_total = j.value("n_total", r.n_total);
  r.anomaly_ratio = j.value("anomaly_ratio", r.anomaly_ratio);
  r.normal_clusters = j.value("normal_clusters", r.normal_clusters);
  r.normal_spread = j.value("normal_spread", r.normal_spread);
  r.cluster_separation = j.value("cluster_separation", r.cluster_separation);
  if (j.contains("anomaly_types")) r.anomaly_types = j.at("anomaly_types").get<std::vector<AnomalyTypeSpec>>();
  r.seen_types = j.value("seen_types", r.seen_types);
  r.gamma_la = j.value("gamma_la", r.gamma_la);
  r.gamma_n = j.value("gamma_n", r.gamma_n);
  r.contamination = j.value("contamination", r.contamination);
  r.train_frac = j.value("train_frac", r.train_frac);
  r.seed = j.value("seed", r.seed);
}

/// CSV with header f0..f{d-1},train_label,truth_type. Numbers use the
/// shortest round-trip representation, so write/read is exact.
inline void write_dataset_csv(std::ostream& os, const SemiDataset& ds) {
  const std::size_t d = ds.features.cols();
  for (std::size_t j = 0; j < d; ++j) os << 'f' << j << ',';
  os << "train_label,truth_type\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) os << format_double(ds.features(i, j)) << ',';
    os << static_cast<int>(ds.train_label[i]) << ',' << ds.truth_type[i] << '\n';
  }
}

inline SemiDataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("dataset csv: missing header");
  std::size_t n_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (n_cols < 3 || line.rfind(",train_label,truth_type") == std::string::npos) {
    throw ConfigError("dataset csv: unexpected header '" + line + "'");
  }
  const std::size_t d = n_cols - 2;
  SemiDataset ds;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (;;) {
      auto pos = rest.find(',');
      cells.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (cells.size() != n_cols) throw ConfigError("dataset csv: row " + std::to_string(rows) + " has wrong width");
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_double(cells[j]));
    const auto lbl = parse_int(cells[d]);
    if (lbl != -1 && lbl != 1) throw ConfigError("dataset csv: train_label must be -1 or 1");
    ds.train_label.push_back(static_cast<TrainLabel>(lbl));
    ds.truth_type.push_back(static_cast<int>(parse_int(cells[d + 1])));
    ++rows;
  }
  ds.features = Matrix(rows, d, std::move(values));
  return ds;
}

/// Writes <stem>.csv plus a <stem>.json sidecar holding the recipe and split.
inline void save_dataset(const std::string& stem, const SemiDataset& ds) {
  std::ofstream csv(stem + ".csv");
  if (!csv) throw ConfigError("cannot write " + stem + ".csv");
  write_dataset_csv(csv, ds);
  std::ofstream side(stem + ".json");
  if (!side) throw ConfigError("cannot write " + stem + ".json");
  nlohmann::json j = {{"recipe", ds.meta},
                      {"split", ds.split == Split::Train ? "train" : "test"},
                      {"rows", ds.size()},
                      {"format", "anoonly-dataset"},
                      {"version", 1}};
  side << j.dump(2) << '\n';
}

inline SemiDataset load_dataset(const std::string& stem) {
  std::ifstream csv(stem + ".csv");
  if (!csv) throw ConfigError("cannot read " + stem + ".csv");
  SemiDataset ds = read_dataset_csv(csv);
  std::ifstream side(stem + ".json");
  if (!side) throw ConfigError("cannot read " + stem + ".json");
  const auto j = nlohmann::json::parse(side);
  ds.meta = j.at("recipe").get<DataRecipe>();
  ds.split = j.at("split").get<std::string>() == "train" ? Split::Train : Split::Test;
  if (j.at("rows").get<std::size_t>() != ds.size()) throw ConfigError("dataset sidecar row count mismatch");
  return ds;
}

}  // namespace anoonly
