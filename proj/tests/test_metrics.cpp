#include <gtest/gtest.h>

#include <random>
#include <set>

#include "anoonly/metrics.hpp"

using namespace anoonly;

namespace {

constexpr Truth A = Truth::Anomaly;
constexpr Truth N = Truth::Normal;

// O(n^2) pair count.
double pair_count_auc(const ScoredSet& s) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (s.truth[i] != A) continue;
    for (std::size_t j = 0; j < s.scores.size(); ++j) {
      if (s.truth[j] != N) continue;
      pairs += 1.0;
      if (s.scores[i] > s.scores[j]) good += 1.0;
      else if (s.scores[i] == s.scores[j]) good += 0.5;
    }
  }
  return good / pairs;
}

// Threshold walk: every distinct score is a cut "predict positive when
// score >= t"; AP sums precision times recall increments over the cuts.
double threshold_walk_ap(const std::vector<double>& scores, const std::vector<Truth>& truth, Truth positive) {
  std::set<double, std::greater<>> cuts(scores.begin(), scores.end());
  double total = 0.0;
  for (auto t : truth) total += t == positive ? 1.0 : 0.0;
  double ap = 0.0, prev_recall = 0.0;
  for (double c : cuts) {
    double tp = 0.0, predicted = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= c) {
        predicted += 1.0;
        if (truth[i] == positive) tp += 1.0;
      }
    }
    const double recall = tp / total;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

ScoredSet random_set(std::mt19937_64& rng, bool with_ties) {
  std::uniform_int_distribution<int> size(2, 12);
  const int n = size(rng);
  ScoredSet s;
  std::uniform_int_distribution<int> coarse(0, 4);
  std::normal_distribution<double> fine(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    s.scores.push_back(with_ties ? coarse(rng) : fine(rng));
    s.truth.push_back(rng() % 2 ? A : N);
  }
  // Both classes present.
  s.truth[0] = A;
  s.truth[1] = N;
  std::shuffle(s.truth.begin(), s.truth.end(), rng);
  return s;
}

}  // namespace

TEST(AucRoc, Examples) {
  EXPECT_EQ(aucroc({{0.9, 0.1}, {A, N}}), 1.0);
  EXPECT_EQ(aucroc({{0.8, 0.4, 0.6, 0.2}, {A, A, N, N}}), 0.75);
  EXPECT_EQ(aucroc({{3, 3, 3, 3}, {A, N, A, N}}), 0.5);
}

TEST(AucRoc, UndefinedAndShapeErrors) {
  EXPECT_THROW(aucroc({{1, 2}, {A, A}}), UndefinedMetricError);
  EXPECT_THROW(aucroc({{1, 2}, {N, N}}), UndefinedMetricError);
  EXPECT_THROW(aucroc({{1, 2}, {N}}), ShapeError);
  EXPECT_THROW(aucpr_anomaly({{1, 2}, {N, N}}), UndefinedMetricError);
  EXPECT_THROW(aucpr_normal({{1, 2}, {A, A}}), UndefinedMetricError);
}

TEST(AucPr, Examples) {
  EXPECT_EQ(aucpr_anomaly({{0.9, 0.8, 0.1}, {A, A, N}}), 1.0);
  EXPECT_EQ(aucpr_normal({{0.9, 0.8, 0.1}, {A, A, N}}), 1.0);
  const ScoredSet anan{{4, 3, 2, 1}, {A, N, A, N}};
  EXPECT_NEAR(aucpr_anomaly(anan), 5.0 / 6.0, 1e-15);
  // Negated ranking reads N, A, N, A: precision 1 at the first normal and
  // 2/3 at the second.
  EXPECT_NEAR(aucpr_normal(anan), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(aucpr_normal(anan), threshold_walk_ap({-4, -3, -2, -1}, anan.truth, N), 1e-15);
}

TEST(AucPr, TiedBlockIsAllOrNone) {
  // One block of two, one anomaly inside: precision 1/2 at recall 1.
  EXPECT_EQ(aucpr_anomaly({{1, 1}, {A, N}}), 0.5);
  EXPECT_EQ(aucpr_anomaly({{1, 1}, {N, A}}), 0.5);
}

TEST(Metrics, MatchBruteForceOracles) {
  std::mt19937_64 rng(2024);
  for (int draw = 0; draw < 1000; ++draw) {
    const auto s = random_set(rng, draw % 2 == 0);
    EXPECT_NEAR(aucroc(s), pair_count_auc(s), 1e-12);
    EXPECT_NEAR(aucpr_anomaly(s), threshold_walk_ap(s.scores, s.truth, A), 1e-12);
    std::vector<double> neg;
    for (double v : s.scores) neg.push_back(-v);
    EXPECT_NEAR(aucpr_normal(s), threshold_walk_ap(neg, s.truth, N), 1e-12);
  }
}

TEST(Metrics, MonotoneTransformInvariance) {
  std::mt19937_64 rng(7);
  for (int draw = 0; draw < 300; ++draw) {
    auto s = random_set(rng, draw % 3 == 0);
    ScoredSet t = s;
    for (auto& v : t.scores) v = std::exp(0.5 * v) + 3.0;
    EXPECT_EQ(aucroc(s), aucroc(t));
    EXPECT_EQ(aucpr_anomaly(s), aucpr_anomaly(t));
    EXPECT_EQ(aucpr_normal(s), aucpr_normal(t));
  }
}

TEST(Metrics, ComplementWithoutTies) {
  std::mt19937_64 rng(8);
  for (int draw = 0; draw < 300; ++draw) {
    auto s = random_set(rng, false);
    ScoredSet neg = s;
    for (auto& v : neg.scores) v = -v;
    EXPECT_NEAR(aucroc(s) + aucroc(neg), 1.0, 1e-12);
  }
}

TEST(Metrics, NormalApIsSwappedAnomalyAp) {
  std::mt19937_64 rng(9);
  for (int draw = 0; draw < 300; ++draw) {
    auto s = random_set(rng, draw % 2 == 0);
    ScoredSet swapped = s;
    for (auto& v : swapped.scores) v = -v;
    for (auto& t : swapped.truth) t = t == A ? N : A;
    EXPECT_EQ(aucpr_normal(s), aucpr_anomaly(swapped));
  }
}

TEST(Metrics, AucRocInvariantUnderDuplication) {
  std::mt19937_64 rng(10);
  for (int draw = 0; draw < 200; ++draw) {
    auto s = random_set(rng, draw % 2 == 0);
    ScoredSet d = s;
    d.scores.insert(d.scores.end(), s.scores.begin(), s.scores.end());
    d.truth.insert(d.truth.end(), s.truth.begin(), s.truth.end());
    EXPECT_NEAR(aucroc(d), aucroc(s), 1e-12);
  }
}

TEST(Metrics, RandomScoresGiveApNearPrior) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 500, n_anom = 100;
  double mean_ap = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    ScoredSet s;
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(u(rng));
      s.truth.push_back(i < n_anom ? A : N);
    }
    mean_ap += aucpr_anomaly(s) / reps;
  }
  EXPECT_NEAR(mean_ap, 0.2, 0.01);
}
