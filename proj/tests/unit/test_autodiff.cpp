#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "orn/gemm.hpp"
#include "orn/ops.hpp"
#include "test_util.hpp"

using namespace orn;
using orn::testing::fd_error;
using orn::testing::random_tensor;
using orn::testing::weighted_sum;

TEST(Tensor, MultiIndexIsRowMajor) {
  Tensorf t({2, 3, 4});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i);
  EXPECT_EQ(t.at({1, 2, 3}), 23.0f);
  EXPECT_EQ(t.at({0, 1, 0}), 4.0f);
  EXPECT_THROW(t.at({2, 0, 0}), DimensionError);
  EXPECT_THROW(t.reshaped({5, 5}), DimensionError);
}

TEST(Gemm, MatchesNaiveLoopsForAllTransposes) {
  std::mt19937_64 rng(3);
  const std::size_t M = 7, N = 5, K = 9;
  for (int ta = 0; ta < 2; ++ta) {
    for (int tb = 0; tb < 2; ++tb) {
      const auto a = random_tensor({M * K}, rng), b = random_tensor({K * N}, rng);
      std::vector<double> c(M * N, 0.5), ref(M * N, 0.5);
      gemm<double>(ta, tb, M, N, K, a.data().data(), b.data().data(), c.data(), true);
      for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < K; ++k) {
            const double av = ta ? a[k * M + i] : a[i * K + k];
            const double bv = tb ? b[j * K + k] : b[k * N + j];
            s += av * bv;
          }
          ref[i * N + j] += s;
        }
      }
      for (std::size_t i = 0; i < M * N; ++i) EXPECT_NEAR(c[i], ref[i], 1e-12) << ta << tb << i;
    }
  }
}

TEST(Gemm, RowResultsDoNotDependOnRowPosition) {
  std::mt19937_64 rng(4);
  const std::size_t K = 33, N = 17;
  auto a = orn::testing::random_tensorf({3, K}, rng);
  auto b = orn::testing::random_tensorf({K, N}, rng);
  std::vector<float> c3(3 * N), c1(N);
  gemm<float>(false, false, 3, N, K, a.data().data(), b.data().data(), c3.data(), false);
  gemm<float>(false, false, 1, N, K, a.data().data() + 2 * K, b.data().data(), c1.data(), false);
  for (std::size_t j = 0; j < N; ++j) EXPECT_EQ(c3[2 * N + j], c1[j]);
}

TEST(Gemm, FrozenProduct) {
  const double a[] = {1, 2, 3, 4, 5, 6};
  const double b[] = {7, 8, 9, 10, 11, 12};
  double c[4];
  gemm<double>(false, false, 2, 2, 3, a, b, c, false);
  EXPECT_EQ(c[0], 58);
  EXPECT_EQ(c[1], 64);
  EXPECT_EQ(c[2], 139);
  EXPECT_EQ(c[3], 154);
}

class OpGradient : public ::testing::Test {
 protected:
  std::mt19937_64 rng{11};
};

TEST_F(OpGradient, Matmul) {
  auto f = [](ad::Graph<double>& g, const std::vector<ad::Var<double>>& x) {
    return weighted_sum(g, ad::matmul(x[0], x[1]));
  };
  EXPECT_LT(fd_error(f, {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}), 1e-8);
  auto fnt = [](ad::Graph<double>& g, const std::vector<ad::Var<double>>& x) {
    return weighted_sum(g, ad::matmul_nt(x[0], x[1]));
  };
  EXPECT_LT(fd_error(fnt, {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng)}), 1e-8);
}

TEST_F(OpGradient, Elementwise) {
  auto f = [](ad::Graph<double>& g, const std::vector<ad::Var<double>>& x) {
    auto y = ad::add(ad::mul(ad::sigmoid(x[0]), ad::tanh(x[1])), ad::sub(x[0], ad::affine(x[1], 2.0, 0.5)));
    return weighted_sum(g, ad::relu(y));
  };
  EXPECT_LT(fd_error(f, {random_tensor({4, 3}, rng), random_tensor({4, 3}, rng)}), 1e-7);
}

TEST_F(OpGradient, ShapeOps) {
  auto f = [](ad::Graph<double>& g, const std::vector<ad::Var<double>>& x) {
    std::vector<ad::Var<double>> parts{x[0], x[1]};
    auto c = ad::concat(parts, 1);                        // [3, 5]
    auto r = ad::reshape(c, {5, 3});
    const std::vector<std::size_t> rows{4, 0, 0, 2};
    auto gathered = ad::gather_rows(r, rows);             // [4, 3]
    auto seg = ad::segment_sum_rows(gathered, {{0, 1}, {}, {3, 2, 1}});
    auto e = ad::expand_rows(ad::sum_axis(seg, 0), 2);
    return ad::add(weighted_sum(g, e), weighted_sum(g, ad::mean_axis(c, 1), 5));
  };
  EXPECT_LT(fd_error(f, {random_tensor({3, 2}, rng), random_tensor({3, 3}, rng)}), 1e-8);
}

TEST_F(OpGradient, Conv3dAndPooling) {
  auto f = [](ad::Graph<double>& g, const std::vector<ad::Var<double>>& x) {
    auto y = ad::conv3d(x[0], x[1], x[2], ad::ConvSpec{2, 1, 1});
    const std::vector<ad::CellSet> sets{{0, {0, 3}}, {1, {1}}, {2, {0, 1, 2, 3}}};
    return ad::add(weighted_sum(g, ad::pool_cells(y, sets)), weighted_sum(g, ad::spatial_mean(y), 3));
  };
  EXPECT_LT(fd_error(f, {random_tensor({2, 3, 4, 4}, rng), random_tensor({3, 2, 3, 3, 3}, rng),
                         random_tensor({3}, rng)}),
            1e-8);
}

TEST_F(OpGradient, Losses) {
  auto ce = [](ad::Graph<double>&, const std::vector<ad::Var<double>>& x) {
    const std::vector<std::size_t> t{2, 0, 1};
    return ad::cross_entropy(x[0], t);
  };
  EXPECT_LT(fd_error(ce, {random_tensor({3, 4}, rng)}), 1e-8);
  const auto targets = random_tensor({2, 3}, rng, 0.0, 1.0);
  auto soft = [&](ad::Graph<double>&, const std::vector<ad::Var<double>>& x) {
    return ad::soft_cross_entropy(x[0], targets);
  };
  EXPECT_LT(fd_error(soft, {random_tensor({2, 3}, rng)}), 1e-8);
  auto bce = [](ad::Graph<double>&, const std::vector<ad::Var<double>>& x) {
    const std::vector<double> t{1, 0, 1, 1};
    return ad::sigmoid_bce_mean<double>(x[0], t);
  };
  EXPECT_LT(fd_error(bce, {random_tensor({1, 4}, rng, -5.0, 5.0)}), 1e-8);
}

TEST(Loss, UniformPredictionCrossEntropyIsLogClasses) {
  for (std::size_t c : {2u, 6u, 12u}) {
    ad::Graph<double> g;
    auto logits = g.constant(Tensord({1, c}, 0.37));
    const std::vector<std::size_t> t{c - 1};
    EXPECT_NEAR(ad::cross_entropy(logits, t).item(), std::log(static_cast<double>(c)), 1e-6);
  }
}

TEST(Loss, CrossEntropyIsStableForLargeLogits) {
  ad::Graph<double> g;
  auto logits = g.constant(Tensord({1, 2}, std::vector<double>{1000.0, 0.0}));
  const std::vector<std::size_t> t{1};
  EXPECT_NEAR(ad::cross_entropy(logits, t).item(), 1000.0, 1e-9);
  auto bce = ad::sigmoid_bce_mean<double>(g.constant(Tensord({1, 1}, -800.0)), std::vector<double>{1.0});
  EXPECT_NEAR(bce.item(), 800.0, 1e-9);
}

TEST(Graph, BackwardVisitsNodesInReverseOrder) {
  ad::Graph<double> g;
  g.set_trace(true);
  auto x = g.variable(Tensord({1, 2}, 1.0));
  auto a = ad::tanh(x);
  auto b = ad::sigmoid(x);
  auto y = ad::sum_all(ad::mul(a, b));
  g.backward(y);
  const auto& order = g.backward_trace();
  ASSERT_FALSE(order.empty());
  for (std::size_t i = 1; i < order.size(); ++i) EXPECT_GT(order[i - 1], order[i]);
  EXPECT_EQ(order.front(), y.node()->index);
}

TEST(Graph, CheckedModeRejectsNonFiniteValues) {
  ad::Graph<double> g(true);
  auto x = g.variable(Tensord({1, 1}, std::nan("")));
  EXPECT_THROW(ad::tanh(x), NumericError);
  ad::Graph<double> unchecked(false);
  auto y = unchecked.variable(Tensord({1, 1}, std::nan("")));
  EXPECT_NO_THROW(ad::tanh(y));
}

TEST(Graph, ShapeMismatchThrowsWithoutBroadcasting) {
  ad::Graph<double> g;
  auto a = g.variable(Tensord({2, 3}));
  auto b = g.variable(Tensord({1, 3}));
  EXPECT_THROW(ad::add(a, b), DimensionError);
  EXPECT_THROW(ad::matmul(a, a), DimensionError);
  EXPECT_THROW(g.backward(a), DimensionError);
}

TEST(Graph, GradientsAccumulateOverFanOut) {
  ad::Graph<double> g;
  auto x = g.variable(Tensord({1, 1}, 3.0));
  auto y = ad::sum_all(ad::add(ad::mul(x, x), x));  // x^2 + x
  g.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}
