#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "orn/backbone.hpp"
#include "orn/nn.hpp"
#include "test_util.hpp"

using namespace orn;
using orn::testing::random_tensor;

namespace {

// out[o,t,y,x] by direct summation over the zero-padded input.
Tensord naive_conv3d(const Tensord& x, const Tensord& w, const Tensord& b, const ad::ConvSpec& s) {
  const std::size_t ci = x.dim(0), T = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t co = w.dim(0), kt = w.dim(2), k = w.dim(3);
  const std::size_t To = T + 2 * s.pad_t - kt + 1;
  const std::size_t Ho = (H + 2 * s.pad_s - k) / s.stride + 1, Wo = (W + 2 * s.pad_s - k) / s.stride + 1;
  Tensord out({co, To, Ho, Wo});
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t t = 0; t < To; ++t) {
      for (std::size_t yy = 0; yy < Ho; ++yy) {
        for (std::size_t xx = 0; xx < Wo; ++xx) {
          double acc = b[o];
          for (std::size_t c = 0; c < ci; ++c) {
            for (std::size_t dt = 0; dt < kt; ++dt) {
              for (std::size_t dy = 0; dy < k; ++dy) {
                for (std::size_t dx = 0; dx < k; ++dx) {
                  const long ti = static_cast<long>(t + dt) - static_cast<long>(s.pad_t);
                  const long yi = static_cast<long>(yy * s.stride + dy) - static_cast<long>(s.pad_s);
                  const long xi = static_cast<long>(xx * s.stride + dx) - static_cast<long>(s.pad_s);
                  if (ti < 0 || yi < 0 || xi < 0 || ti >= long(T) || yi >= long(H) || xi >= long(W)) continue;
                  acc += w.at({o, c, dt, dy, dx}) * x.at({c, std::size_t(ti), std::size_t(yi), std::size_t(xi)});
                }
              }
            }
          }
          out.at({o, t, yy, xx}) = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST(Conv3d, MatchesDirectSummation) {
  std::mt19937_64 rng(5);
  for (const ad::ConvSpec spec : {ad::ConvSpec{1, 0, 0}, ad::ConvSpec{2, 1, 1}, ad::ConvSpec{1, 1, 1}}) {
    const auto x = random_tensor({3, 4, 7, 6}, rng);
    const auto w = random_tensor({2, 3, 3, 3, 3}, rng);
    const auto b = random_tensor({2}, rng);
    ad::Graph<double> g;
    auto y = ad::conv3d(g.constant(x), g.constant(w), g.constant(b), spec);
    const auto ref = naive_conv3d(x, w, b, spec);
    ASSERT_EQ(y.shape(), ref.shape());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.value()[i], ref[i], 1e-12);
  }
}

TEST(Conv3d, RejectsKernelLargerThanInput) {
  ad::Graph<double> g;
  auto x = g.constant(Tensord({1, 1, 2, 2}));
  auto w = g.constant(Tensord({1, 1, 3, 3, 3}));
  auto b = g.constant(Tensord({1}));
  EXPECT_THROW(ad::conv3d(x, w, b, ad::ConvSpec{1, 0, 0}), DimensionError);
}

TEST(Backbone, FeatureMapShapesFollowStrides) {
  BackboneConfig cfg = default_backbone();
  for (auto& b : cfg.blocks) b.channels_out = 4;
  EXPECT_EQ(cfg.activity_stride(), 8u);
  EXPECT_EQ(cfg.object_stride(), 4u);
  auto store = ParamStore<double>();
  std::mt19937_64 rng(1);
  backbone::add_params(store, cfg, rng);
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  auto maps = backbone::forward(p, cfg, g.constant(random_tensor({3, 4, 32, 32}, rng)));
  EXPECT_EQ(maps.activity.shape(), (Shape{4, 4, 4, 4}));
  EXPECT_EQ(maps.object.shape(), (Shape{4, 4, 8, 8}));
  EXPECT_THROW(cfg.validate(30, 30), ConfigError);
}

TEST(Backbone, ActivityAndObjectPathsMatchFullForward) {
  BackboneConfig cfg = default_backbone();
  for (auto& b : cfg.blocks) b.channels_out = 3;
  ParamStore<double> store;
  std::mt19937_64 rng(2);
  backbone::add_params(store, cfg, rng);
  const auto clip = random_tensor({3, 2, 16, 16}, rng);
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  auto full = backbone::forward(p, cfg, g.constant(clip));
  auto act = backbone::forward_activity(p, cfg, g.constant(clip));
  auto obj = backbone::forward_object(p, cfg, g.constant(clip));
  EXPECT_EQ(full.activity.value(), act.value());
  EXPECT_EQ(full.object.value(), obj.value());
}

class Inflate : public ::testing::TestWithParam<Inflation> {};

TEST_P(Inflate, PreservesPerFrameFunction) {
  BackboneConfig cfg;
  cfg.blocks = {{4, Inflation::k2D, 2}, {4, Inflation::k2D, 1}, {5, Inflation::k2D, 2}};
  cfg.split_at = 1;
  ParamStore<double> store;
  std::mt19937_64 rng(8);
  backbone::add_params(store, cfg, rng);
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store.name(i).ends_with(".b")) store.value(i) = random_tensor(store.value(i).shape(), rng, -0.1, 0.1);
  }
  const auto clip = random_tensor({3, 3, 8, 8}, rng);
  auto run = [&](const BackboneConfig& c, const ParamStore<double>& s) {
    ad::Graph<double> g;
    Bindings<double> p(g, s);
    auto m = backbone::forward(p, c, g.constant(clip));
    return std::make_pair(m.activity.value(), m.object.value());
  };
  const auto before = run(cfg, store);
  for (std::size_t block = 0; block < cfg.blocks.size(); ++block) {
    const auto inflated_cfg = backbone::inflate(cfg, block, GetParam());
    const auto inflated = backbone::inflate_params(store, cfg, block, GetParam());
    ParamStore<double> reference;
    std::mt19937_64 r2(0);
    backbone::add_params(reference, inflated_cfg, r2);
    ASSERT_EQ(inflated.size(), reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
      EXPECT_EQ(inflated.name(i), reference.name(i));
      EXPECT_EQ(inflated.value(i).shape(), reference.value(i).shape());
    }
    const auto after = run(inflated_cfg, inflated);
    for (std::size_t i = 0; i < before.first.size(); ++i) EXPECT_NEAR(after.first[i], before.first[i], 1e-12);
    for (std::size_t i = 0; i < before.second.size(); ++i) EXPECT_NEAR(after.second[i], before.second[i], 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, Inflate, ::testing::Values(Inflation::k3D, Inflation::k2p5D));

TEST(Backbone, InflationGridHasFourteenDistinctRows) {
  const auto grid = backbone::inflation_grid();
  ASSERT_EQ(grid.size(), 14u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      EXPECT_FALSE(grid[i].blocks == grid[j].blocks && grid[i].aggregation == grid[j].aggregation) << i << " " << j;
    }
    const auto cfg = backbone::apply_row(backbone::five_block_backbone(), grid[i]);
    EXPECT_NO_THROW(cfg.validate(32, 32));
  }
}

TEST(Backbone, ParameterCountsOfInflation) {
  BackboneConfig cfg;
  cfg.blocks = {{4, Inflation::k2D, 1}, {4, Inflation::k2D, 1}};
  cfg.split_at = 1;
  // shared 3->4: 4*3*9 + 4; two head copies 4->4: 2 * (4*4*9 + 4)
  EXPECT_EQ(backbone::parameter_count(cfg), 112u + 2u * 148u);
  EXPECT_EQ(backbone::parameter_count(backbone::inflate(cfg, 0, Inflation::k3D)), 3u * 108u + 4u + 296u);
  EXPECT_EQ(backbone::parameter_count(backbone::inflate(cfg, 0, Inflation::k2p5D)), 112u + 4u * 4u * 3u + 4u + 296u);
}

TEST(Gru, ForwardMatchesHandComputation) {
  ParamStore<double> store;
  std::mt19937_64 rng(4);
  nn::add_gru(store, "g", 3, 2, rng);
  for (std::size_t i = 0; i < store.size(); ++i) store.value(i) = random_tensor(store.value(i).shape(), rng);
  const auto x = random_tensor({1, 3}, rng), h = random_tensor({1, 2}, rng);
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  auto out = nn::gru_step(p, "g", g.constant(x), g.constant(h));
  auto affine = [&](const char* w, const char* u, const char* b, std::size_t j, bool with_h) {
    double s = store.at(b)[j];
    for (std::size_t k = 0; k < 3; ++k) s += store.at(w).at({j, k}) * x[k];
    if (with_h) {
      for (std::size_t k = 0; k < 2; ++k) s += store.at(u).at({j, k}) * h[k];
    }
    return s;
  };
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t j = 0; j < 2; ++j) {
    const double z = sig(affine("g.wz", "g.uz", "g.bz", j, true));
    const double r = sig(affine("g.wr", "g.ur", "g.br", j, true));
    double hn = store.at("g.bhn")[j];
    for (std::size_t k = 0; k < 2; ++k) hn += store.at("g.un").at({j, k}) * h[k];
    const double n = std::tanh(affine("g.wn", "g.un", "g.bn", j, false) + r * hn);
    EXPECT_NEAR(out.value()[j], (1.0 - z) * h[j] + z * n, 1e-14);
  }
}

TEST(Gru, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  ParamStore<double> store;
  nn::add_gru(store, "g", 3, 4, rng);
  auto f = [&](ad::Graph<double>& g, const std::vector<ad::Var<double>>& v) {
    Bindings<double> p(g, store);
    auto h1 = nn::gru_step(p, "g", v[0], v[1]);
    auto h2 = nn::gru_step(p, "g", v[0], h1);
    return orn::testing::weighted_sum(g, h2);
  };
  EXPECT_LT(orn::testing::fd_error(f, {random_tensor({1, 3}, rng), random_tensor({1, 4}, rng)}), 1e-8);
}

TEST(Mlp, MatchesNaiveLoops) {
  ParamStore<double> store;
  std::mt19937_64 rng(9);
  nn::add_mlp(store, "m", {3, 4, 2}, rng);
  for (std::size_t i = 0; i < store.size(); ++i) store.value(i) = random_tensor(store.value(i).shape(), rng);
  const auto x = random_tensor({2, 3}, rng);
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  auto y = nn::mlp(p, "m", 2, g.constant(x), nn::OutputActivation::tanh);
  for (std::size_t r = 0; r < 2; ++r) {
    double hidden[4];
    for (std::size_t j = 0; j < 4; ++j) {
      double s = store.at("m.0.b")[j];
      for (std::size_t k = 0; k < 3; ++k) s += store.at("m.0.w").at({j, k}) * x.at({r, k});
      hidden[j] = std::max(0.0, s);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      double s = store.at("m.1.b")[j];
      for (std::size_t k = 0; k < 4; ++k) s += store.at("m.1.w").at({j, k}) * hidden[k];
      EXPECT_NEAR(y.value().at({r, j}), std::tanh(s), 1e-14);
    }
  }
}
