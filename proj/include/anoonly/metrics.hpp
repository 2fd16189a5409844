#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "anoonly/errors.hpp"

namespace anoonly {

enum class Truth { Normal, Anomaly };

/// Scores (higher = more anomalous) paired with ground truth.
struct ScoredSet {
  std::vector<double> scores;
  std::vector<Truth> truth;

  std::size_t count(Truth t) const {
    return static_cast<std::size_t>(std::count(truth.begin(), truth.end(), t));
  }
};

namespace detail {

inline void check_lengths(const ScoredSet& s) {
  if (s.scores.size() != s.truth.size()) throw ShapeError("scored set: scores/truth length mismatch");
}

inline std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

/// Average precision with `positive` as the positive class, ranking by
/// `scores` descending. Tied scores form one threshold block.
inline double average_precision(std::span<const double> scores, std::span<const Truth> truth, Truth positive) {
  std::size_t total_pos = 0;
  for (auto t : truth) total_pos += t == positive ? 1 : 0;
  const auto order = order_by_score_desc(scores);
  double ap = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::size_t block_pos = 0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      block_pos += truth[order[end]] == positive ? 1 : 0;
      ++end;
    }
    tp += block_pos;
    seen += end - start;
    if (block_pos > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(seen);
      ap += precision * static_cast<double>(block_pos) / static_cast<double>(total_pos);
    }
    start = end;
  }
  return ap;
}

}  // namespace detail

/// P(random anomaly outranks random normal), ties counted one half, via
/// average-rank sums.
inline double aucroc(const ScoredSet& s) {
  detail::check_lengths(s);
  const std::size_t n_anom = s.count(Truth::Anomaly);
  const std::size_t n_norm = s.count(Truth::Normal);
  if (n_anom == 0 || n_norm == 0) throw UndefinedMetricError("aucroc needs both classes");

  std::vector<std::size_t> idx(s.scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.scores[a] < s.scores[b]; });
  // Twice the rank sum keeps tied average ranks integral.
  unsigned long long twice_rank_sum = 0;
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t end = start;
    while (end < idx.size() && s.scores[idx[end]] == s.scores[idx[start]]) ++end;
    const unsigned long long twice_avg_rank = static_cast<unsigned long long>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k)
      if (s.truth[idx[k]] == Truth::Anomaly) twice_rank_sum += twice_avg_rank;
    start = end;
  }
  const double na = static_cast<double>(n_anom);
  const double u = static_cast<double>(twice_rank_sum) / 2.0 - na * (na + 1.0) / 2.0;
  return u / (na * static_cast<double>(n_norm));
}

/// Average precision with anomalies as the positive class.
inline double aucpr_anomaly(const ScoredSet& s) {
  detail::check_lengths(s);
  if (s.count(Truth::Anomaly) == 0) throw UndefinedMetricError("aucpr_anomaly needs anomalies");
  return detail::average_precision(s.scores, s.truth, Truth::Anomaly);
}

/// Average precision with normals as the positive class, ranked by the
/// negated score.
inline double aucpr_normal(const ScoredSet& s) {
  detail::check_lengths(s);
  if (s.count(Truth::Normal) == 0) throw UndefinedMetricError("aucpr_normal needs normals");
  std::vector<double> neg(s.scores.size());
  std::transform(s.scores.begin(), s.scores.end(), neg.begin(), [](double v) { return -v; });
  return detail::average_precision(neg, s.truth, Truth::Normal);
}

}  // namespace anoonly
