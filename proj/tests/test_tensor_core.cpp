#include <gtest/gtest.h>

#include <numeric>

#include "anoonly/dense.hpp"
#include "anoonly/grad_check.hpp"
#include "anoonly/normalization.hpp"
#include "support.hpp"

using namespace anoonly;
using anoonly::testing::fd_gradient;
using anoonly::testing::max_rel_error;
using anoonly::testing::naive_matmul;
using anoonly::testing::random_matrix;

namespace {

double column_mean(const Matrix& m, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j);
  return s / static_cast<double>(m.rows());
}

double column_biased_var(const Matrix& m, std::size_t j) {
  const double mu = column_mean(m, j);
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += (m(i, j) - mu) * (m(i, j) - mu);
  return s / static_cast<double>(m.rows());
}

}  // namespace

TEST(Matrix, ShapeChecks) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  EXPECT_THROW(vstack(Matrix(1, 2), Matrix(1, 3)), ShapeError);
  Matrix a(2, 2);
  EXPECT_THROW(a += Matrix(2, 3), ShapeError);
}

TEST(Matrix, TransposedProductsMatchOracle) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    auto a = random_matrix(rng, 5, 3);
    auto b = random_matrix(rng, 5, 4);
    auto c = random_matrix(rng, 6, 3);
    Matrix at(3, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j) at(j, i) = a(i, j);
    Matrix ct(3, 6);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 3; ++j) ct(j, i) = c(i, j);
    EXPECT_LT(max_abs_diff(matmul_tn(a, b), naive_matmul(at, b)), 1e-12);
    EXPECT_LT(max_abs_diff(matmul_nt(a, c), naive_matmul(a, ct)), 1e-12);
  }
}

TEST(Dense, IdentityWeights) {
  DenseLayer l(2, 2);
  l.weight = Matrix::identity(2);
  EXPECT_EQ(l.forward(Matrix{{3, -1}}), (Matrix{{3, -1}}));
}

TEST(Dense, HandArithmetic) {
  DenseLayer l(2, 1);
  l.weight = Matrix{{1}, {1}};
  l.bias = Matrix{{0.5}};
  EXPECT_EQ(l.forward(Matrix{{2, 3}}), (Matrix{{5.5}}));
}

TEST(Dense, MatchesNaiveMatmul) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    DenseLayer l(7, 5);
    l.weight = random_matrix(rng, 7, 5);
    l.bias = random_matrix(rng, 1, 5);
    auto x = random_matrix(rng, 9, 7);
    Matrix want = naive_matmul(x, l.weight);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 5; ++j) want(i, j) += l.bias[j];
    EXPECT_LT(max_abs_diff(l.forward(x), want), 1e-12);
  }
}

TEST(Dense, Errors) {
  DenseLayer l(3, 2);
  EXPECT_THROW(l.forward(Matrix(1, 4)), ShapeError);
  EXPECT_THROW(l.backward(Matrix(1, 2)), StateError);
  EXPECT_THROW(DenseLayer(0, 2), ConfigError);
}

TEST(Dense, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    DenseLayer l(4, 3);
    l.weight = random_matrix(rng, 4, 3);
    l.bias = random_matrix(rng, 1, 3);
    const auto x = random_matrix(rng, 6, 4);
    const auto g = random_matrix(rng, 6, 3);
    l.forward(x);
    const Matrix gx = l.backward(g);

    auto fx = [&](const Matrix& xx) { return anoonly::testing::dot(l.apply(xx), g); };
    EXPECT_LT(max_rel_error(gx, fd_gradient(fx, x)), 1e-5);
    auto fw = [&](const Matrix& w) {
      DenseLayer c = l;
      c.weight = w;
      return anoonly::testing::dot(c.apply(x), g);
    };
    EXPECT_LT(max_rel_error(l.grad_weight, fd_gradient(fw, l.weight)), 1e-5);
    auto fb = [&](const Matrix& b) {
      DenseLayer c = l;
      c.bias = b;
      return anoonly::testing::dot(c.apply(x), g);
    };
    EXPECT_LT(max_rel_error(l.grad_bias, fd_gradient(fb, l.bias)), 1e-5);
  }
}

TEST(Dense, GradientsAccumulateUntilZeroed) {
  std::mt19937_64 rng(9);
  DenseLayer l(3, 2);
  l.weight = random_matrix(rng, 3, 2);
  const auto x = random_matrix(rng, 4, 3);
  const auto g = random_matrix(rng, 4, 2);
  l.forward(x);
  l.backward(g);
  const Matrix once = l.grad_weight;
  l.forward(x);
  l.backward(g);
  EXPECT_LT(max_abs_diff(l.grad_weight, once * 2.0), 1e-12);
  l.zero_grad();
  EXPECT_EQ(l.grad_weight, Matrix(3, 2));
}

TEST(BatchNorm, HandNormalizedExample) {
  BatchNormLayer bn(2, false, 1e-12);
  const Matrix out = bn.forward_train(Matrix{{1, 3}, {3, 5}});
  EXPECT_LT(max_abs_diff(out, Matrix{{-1, -1}, {1, 1}}), 1e-9);
}

TEST(BatchNorm, IdenticalRowsGiveZeros) {
  BatchNormLayer bn(2);
  const Matrix out = bn.forward_train(Matrix{{7, 7}, {7, 7}});
  EXPECT_EQ(out, Matrix(2, 2));
  EXPECT_TRUE(out.all_finite());
}

TEST(BatchNorm, NormalizationIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> rows(2, 40);
  std::uniform_real_distribution<double> scale(0.01, 50.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t b = rows(rng), d = 5;
    Matrix h = random_matrix(rng, b, d, scale(rng));
    for (std::size_t i = 0; i < b; ++i) h(i, 1) += 100.0;
    BatchNormLayer bn(d);
    const Matrix out = bn.forward_train(h);
    for (std::size_t j = 0; j < d; ++j) {
      const double var = column_biased_var(h, j);
      EXPECT_LT(std::abs(column_mean(out, j)), 1e-9);
      EXPECT_NEAR(column_biased_var(out, j), var / (var + bn.eps), 1e-6);
    }
  }
}

TEST(BatchNorm, RunningStatistics) {
  BatchNormLayer bn(1, false, 1e-5, 0.1);
  bn.forward_train(Matrix{{1}, {3}});
  EXPECT_DOUBLE_EQ(bn.running_mean[0], 0.9 * 0.0 + 0.1 * 2.0);
  EXPECT_DOUBLE_EQ(bn.running_var[0], 0.9 * 1.0 + 0.1 * 1.0);
}

TEST(BatchNorm, EvalExamples) {
  BatchNormLayer bn(3);
  const Matrix h{{1.5, -2, 0.25}};
  EXPECT_LT(max_abs_diff(bn.forward_eval(h), h), 1e-5);

  BatchNormLayer one(1);
  one.running_mean = Matrix{{2}};
  one.running_var = Matrix{{4}};
  EXPECT_NEAR(one.forward_eval(Matrix{{6}})(0, 0), 2.0, 1e-5);
}

TEST(BatchNorm, SingleRowTrainRejectedEvalAccepted) {
  BatchNormLayer bn(2);
  EXPECT_THROW(bn.forward_train(Matrix{{1, 2}}), BatchTooSmallError);
  EXPECT_NO_THROW(bn.forward_eval(Matrix{{1, 2}}));
  EXPECT_THROW(bn.forward_eval(Matrix{{1, 2, 3}}), ShapeError);
  EXPECT_THROW(bn.backward(Matrix{{1, 2}}), StateError);
}

TEST(BatchNorm, EvalIsRowWise) {
  std::mt19937_64 rng(23);
  BatchNormLayer bn(4);
  for (int k = 0; k < 5; ++k) bn.forward_train(random_matrix(rng, 10, 4, 3.0));
  const auto h = random_matrix(rng, 9, 4);
  const Matrix out = bn.forward_eval(h);

  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  EXPECT_EQ(bn.forward_eval(select_rows(h, perm)), select_rows(out, perm));

  std::vector<std::size_t> top{0, 1, 2, 3}, rest{4, 5, 6, 7, 8};
  EXPECT_EQ(vstack(bn.forward_eval(select_rows(h, top)), bn.forward_eval(select_rows(h, rest))), out);
}

TEST(BatchNorm, EvalMatchesExternalFormulaBitForBit) {
  std::mt19937_64 rng(29);
  BatchNormLayer bn(3);
  for (int k = 0; k < 20; ++k) bn.forward_train(random_matrix(rng, 16, 3, 2.0));
  const auto h = random_matrix(rng, 5, 3);
  const Matrix out = bn.forward_eval(h);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double want = (h(i, j) - bn.running_mean[j]) / std::sqrt(bn.running_var[j] + bn.eps);
      EXPECT_EQ(out(i, j), want);
    }
}

TEST(BatchNorm, InvariantToPerColumnAffineInput) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> shift(-20, 20), scale(0.5, 20);
  for (int t = 0; t < 100; ++t) {
    const auto h = random_matrix(rng, 12, 4);
    Matrix g = h;
    for (std::size_t j = 0; j < 4; ++j) {
      const double s = scale(rng), c = shift(rng);
      for (std::size_t i = 0; i < 12; ++i) g(i, j) = s * h(i, j) + c;
    }
    // eps shifts the output by O(eps / var); keep it negligible here.
    BatchNormLayer a(4, false, 1e-12), b(4, false, 1e-12);
    EXPECT_LT(max_abs_diff(a.forward_train(h), b.forward_train(g)), 1e-6);
  }
}

TEST(BatchNorm, ZeroAndConstantUpstreamGradients) {
  std::mt19937_64 rng(37);
  BatchNormLayer bn(4);
  bn.forward_train(random_matrix(rng, 8, 4));
  EXPECT_EQ(bn.backward(Matrix(8, 4)), Matrix(8, 4));

  bn.forward_train(random_matrix(rng, 8, 4));
  const Matrix row = random_matrix(rng, 1, 4);
  Matrix g(8, 4);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 4; ++j) g(i, j) = row[j];
  const Matrix gi = bn.backward(g);
  for (double v : gi.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(BatchNorm, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const bool affine = t % 2 == 1;
    BatchNormLayer bn(4, affine);
    if (affine) {
      bn.gamma = random_matrix(rng, 1, 4);
      bn.beta = random_matrix(rng, 1, 4);
    }
    const auto h = random_matrix(rng, 8, 4, 2.0);
    const auto g = random_matrix(rng, 8, 4);
    bn.forward_train(h);
    const Matrix gh = bn.backward(g);

    auto fh = [&](const Matrix& x) {
      BatchNormLayer c = bn;
      return anoonly::testing::dot(c.forward_train(x), g);
    };
    EXPECT_LT(max_rel_error(gh, fd_gradient(fh, h)), 1e-5) << "instance " << t;
    if (affine) {
      auto fg = [&](const Matrix& gamma) {
        BatchNormLayer c = bn;
        c.gamma = gamma;
        return anoonly::testing::dot(c.forward_train(h), g);
      };
      EXPECT_LT(max_rel_error(bn.grad_gamma, fd_gradient(fg, bn.gamma)), 1e-5);
      auto fb = [&](const Matrix& beta) {
        BatchNormLayer c = bn;
        c.beta = beta;
        return anoonly::testing::dot(c.forward_train(h), g);
      };
      EXPECT_LT(max_rel_error(bn.grad_beta, fd_gradient(fb, bn.beta)), 1e-5);
    }
  }
}

TEST(BatchNorm, FrozenForwardUsesRunningStats) {
  std::mt19937_64 rng(43);
  BatchNormLayer bn(3);
  bn.forward_train(random_matrix(rng, 6, 3));
  const Matrix rm = bn.running_mean, rv = bn.running_var;
  const auto h = random_matrix(rng, 1, 3);
  EXPECT_EQ(bn.forward_frozen(h), bn.forward_eval(h));
  EXPECT_EQ(bn.running_mean, rm);
  EXPECT_EQ(bn.running_var, rv);
  const auto g = random_matrix(rng, 1, 3);
  const Matrix gh = bn.backward(g);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(gh[j], g[j] / std::sqrt(rv[j] + bn.eps));
}

TEST(LayerNorm, Examples) {
  LayerNormLayer ln(2, 1e-12);
  EXPECT_LT(max_abs_diff(ln.forward(Matrix{{1, 3}}), Matrix{{-1, 1}}), 1e-9);
  LayerNormLayer c(3);
  EXPECT_EQ(c.forward(Matrix{{4, 4, 4}}), Matrix(1, 3));
  EXPECT_THROW(c.forward(Matrix(1, 2)), ShapeError);
  EXPECT_THROW(LayerNormLayer(3).backward(Matrix(1, 3)), StateError);
}

TEST(LayerNorm, RowsAreIndependent) {
  std::mt19937_64 rng(47);
  LayerNormLayer ln(5);
  const auto h = random_matrix(rng, 6, 5);
  const Matrix out = ln.apply(h);
  for (std::size_t i = 0; i < 6; ++i) {
    const std::vector<std::size_t> one{i};
    EXPECT_EQ(ln.apply(select_rows(h, one)), select_rows(out, one));
  }
}

TEST(LayerNorm, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 100; ++t) {
    LayerNormLayer ln(5);
    const auto h = random_matrix(rng, 6, 5, 3.0);
    const auto g = random_matrix(rng, 6, 5);
    ln.forward(h);
    const Matrix gh = ln.backward(g);
    auto f = [&](const Matrix& x) { return anoonly::testing::dot(ln.apply(x), g); };
    EXPECT_LT(max_rel_error(gh, fd_gradient(f, h)), 1e-5) << "instance " << t;
  }
}

TEST(GradCheck, SquareFunction) {
  auto f = [](const Matrix& x) { return x[0] * x[0]; };
  const auto rep = grad_check(f, Matrix{{3}}, Matrix{{6}});
  EXPECT_TRUE(rep.passed);
  EXPECT_LT(rep.max_abs_diff, 1e-8);
}

TEST(GradCheck, WrongGradientFails) {
  std::mt19937_64 rng(59);
  const auto x = random_matrix(rng, 3, 3);
  auto f = [](const Matrix& m) {
    double s = 0;
    for (double v : m.data()) s += std::sin(v);
    return s;
  };
  Matrix good(3, 3);
  for (std::size_t i = 0; i < 9; ++i) good[i] = std::cos(x[i]);
  EXPECT_TRUE(grad_check(f, x, good).passed);
  EXPECT_FALSE(grad_check(f, x, good * 2.0).passed);
}

TEST(GradCheck, NonFiniteEvaluationThrows) {
  auto f = [](const Matrix& x) { return std::log(x[0]); };
  EXPECT_THROW(grad_check(f, Matrix{{0.0}}, Matrix{{1.0}}), NumericError);
  EXPECT_THROW(grad_check(f, Matrix{{1e-7}}, Matrix{{1e7}}), NumericError);
}
