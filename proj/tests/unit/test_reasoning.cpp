#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "orn/context.hpp"
#include "orn/reasoning.hpp"
#include "test_util.hpp"

using namespace orn;

TEST(TPrime, UniformPastFrequencies) {
  std::mt19937_64 rng(1);
  EXPECT_FALSE(reasoning::sample_t_prime(1, TPrimePolicy::uniform_past, rng).has_value());
  std::map<std::size_t, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[*reasoning::sample_t_prime(4, TPrimePolicy::uniform_past, rng)];
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [tp, c] : counts) {
    EXPECT_GE(tp, 1u);
    EXPECT_LE(tp, 3u);
    EXPECT_NEAR(c / double(n), 1.0 / 3.0, 0.01);
  }
  const auto before = rng;
  EXPECT_EQ(*reasoning::sample_t_prime(4, TPrimePolicy::previous_frame, rng), 3u);
  EXPECT_EQ(rng, before);
}

TEST(Cliques, CountsPerMode) {
  PairingConfig p;
  p.clique_size = 2;
  EXPECT_EQ(reasoning::enumerate_cliques(3, 4, p).size(), 12u);
  p.clique_size = 1;
  EXPECT_EQ(reasoning::enumerate_cliques(3, 4, p).size(), 7u);
  p.unary_both_frames = false;
  EXPECT_EQ(reasoning::enumerate_cliques(3, 4, p).size(), 4u);
  p.clique_size = 3;
  // C(7,3) - C(3,3) - C(4,3)
  EXPECT_EQ(reasoning::enumerate_cliques(3, 4, p).size(), 35u - 1u - 4u);
  p.mode = PairingMode::intra_frame;
  EXPECT_EQ(reasoning::enumerate_cliques(3, 4, p).size(), 6u);
}

TEST(Cliques, InterFramePairsAreOrderedPastToCurrent) {
  PairingConfig p;
  const auto c = reasoning::enumerate_cliques(2, 3, p);
  ASSERT_EQ(c.size(), 6u);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i][0], (reasoning::Member{0, i / 3}));
    EXPECT_EQ(c[i][1], (reasoning::Member{1, i % 3}));
  }
  p.clique_size = 3;
  for (const auto& t : reasoning::enumerate_cliques(2, 3, p)) {
    std::set<std::size_t> frames;
    for (const auto& m : t) frames.insert(m.frame);
    EXPECT_EQ(frames.size(), 2u);
  }
}

TEST(Relate, BatchedEqualsDoubleLoop) {
  std::mt19937_64 rng(21);
  for (auto reduction : {ReductionOrder::canonical, ReductionOrder::enumeration}) {
    const auto cfg = oracle::reasoning_model(2, PairingMode::inter_frame, reduction);
    const auto store = oracle::reasoning_params<float>(cfg, 3);
    for (int trial = 0; trial < 20; ++trial) {
      const auto past = oracle::random_rows<float>(1 + rng() % 6, cfg.descriptor_dim(), rng);
      const auto cur = oracle::random_rows<float>(1 + rng() % 6, cfg.descriptor_dim(), rng);
      const auto batched = oracle::relate_batched(store, cfg, past, cur);
      const auto loop = oracle::relate_double_loop(store, cfg, past, cur);
      for (std::size_t i = 0; i < loop.size(); ++i) {
        if (reduction == ReductionOrder::enumeration) {
          EXPECT_EQ(batched[i], loop[i]);
        } else {
          EXPECT_NEAR(batched[i], loop[i], 1e-5);
        }
      }
    }
  }
}

TEST(Relate, CliqueOneIsTheSumOfUnaries) {
  std::mt19937_64 rng(22);
  const auto cfg = oracle::reasoning_model(1, PairingMode::inter_frame, ReductionOrder::enumeration);
  const auto store = oracle::reasoning_params<float>(cfg, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto past = oracle::random_rows<float>(1 + rng() % 6, cfg.descriptor_dim(), rng);
    const auto cur = oracle::random_rows<float>(1 + rng() % 6, cfg.descriptor_dim(), rng);
    EXPECT_EQ(oracle::relate_batched(store, cfg, past, cur), oracle::sum_of_unaries(store, cfg, past, cur));
  }
}

TEST(Relate, NoObjectsGivesZero) {
  const auto cfg = oracle::reasoning_model();
  const auto store = oracle::reasoning_params<double>(cfg, 5);
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  std::mt19937_64 rng(1);
  auto out = reasoning::relate(p, cfg, ad::Var<double>{}, g.constant(oracle::random_rows<double>(2, 11, rng)));
  for (auto v : out.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(RunClip, WithinFramePermutationInvariance) {
  std::mt19937_64 rng(23);
  for (auto reduction : {ReductionOrder::canonical, ReductionOrder::enumeration}) {
    const auto cfg = oracle::reasoning_model(2, PairingMode::inter_frame, reduction);
    const auto store = oracle::reasoning_params<float>(cfg, 6);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Tensorf> frames, permuted;
      for (int f = 0; f < 4; ++f) {
        frames.push_back(oracle::random_rows<float>(1 + rng() % 5, cfg.descriptor_dim(), rng));
        permuted.push_back(oracle::shuffle_rows(frames.back(), rng));
      }
      const auto a = oracle::run_clip_output(store, cfg, frames, trial);
      const auto b = oracle::run_clip_output(store, cfg, permuted, trial);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (reduction == ReductionOrder::canonical) {
          EXPECT_EQ(a[i], b[i]);
        } else {
          EXPECT_NEAR(a[i], b[i], 1e-5);
        }
      }
    }
  }
}

TEST(RunClip, FirstStepHasNoRelationsAndStatesAreSummed) {
  const auto cfg = oracle::reasoning_model();
  const auto store = oracle::reasoning_params<double>(cfg, 7);
  std::mt19937_64 rng(2);
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  reasoning::ClipDescriptors<double> d;
  d.rows = g.constant(oracle::random_rows<double>(6, cfg.descriptor_dim(), rng));
  d.offsets = {0, 2, 4, 6};
  auto out = reasoning::run_clip(p, cfg, d, rng);
  ASSERT_EQ(out.states.size(), 3u);
  EXPECT_FALSE(out.t_primes[0].has_value());
  for (std::size_t t = 1; t < 3; ++t) EXPECT_LT(*out.t_primes[t], t);
  for (std::size_t i = 0; i < out.relations.g.dim(1); ++i) EXPECT_EQ(out.relations.g.value()[i], 0.0);
  for (std::size_t i = 0; i < out.r.size(); ++i) {
    double s = 0.0;
    for (const auto& st : out.states) s += st.value()[i];
    EXPECT_DOUBLE_EQ(out.r.value()[i], s);
  }
}

TEST(RunClip, GradientsMatchFiniteDifferences) {
  for (auto kind : {FPhiKind::recurrent, FPhiKind::mlp}) {
    for (std::size_t clique : {1u, 2u, 3u}) {
      auto cfg = oracle::reasoning_model(clique);
      cfg.pairing.f_phi_kind = kind;
      const auto store = oracle::reasoning_params<double>(cfg, 8);
      auto f = [&](ad::Graph<double>& g, const std::vector<ad::Var<double>>& x) {
        Bindings<double> p(g, store);
        reasoning::ClipDescriptors<double> d;
        d.rows = x[0];
        d.offsets = {0, 2, 5, 7};
        std::mt19937_64 rng(3);
        return orn::testing::weighted_sum(g, reasoning::run_clip(p, cfg, d, rng).r);
      };
      std::mt19937_64 rng(9);
      EXPECT_LT(orn::testing::fd_error(f, {oracle::random_rows<double>(7, cfg.descriptor_dim(), rng)}), 1e-6)
          << clique;
    }
  }
}

TEST(GateSaturation, RecurrentUnitsKeepOrReplaceTheirState) {
  auto cfg = oracle::reasoning_model();
  cfg.context.state_dim = 4;
  ParamStore<double> store = oracle::reasoning_params<double>(cfg, 10);
  std::mt19937_64 rng(4);
  context::add_params(store, cfg, rng);
  const std::size_t vdim = cfg.backbone.activity_channels();
  const auto x_r = oracle::random_rows<double>(1, cfg.reasoning.relation_dim, rng);
  const auto h_r = oracle::random_rows<double>(1, cfg.reasoning.state_dim, rng);
  const auto x_c = oracle::random_rows<double>(1, vdim, rng);
  const auto h_c = oracle::random_rows<double>(1, cfg.context.state_dim, rng);
  for (const std::string prefix : {"orn.f", "context.f"}) {
    const bool ctx = prefix == "context.f";
    const auto& x = ctx ? x_c : x_r;
    const auto& h = ctx ? h_c : h_r;
    auto set = [&](const std::string& name, double v) { store.at(prefix + name).fill(v); };
    auto step = [&] {
      ad::Graph<double> g;
      Bindings<double> p(g, store);
      return nn::gru_step(p, prefix, g.constant(x), g.constant(h)).value();
    };
    // z -> 0: the state passes through unchanged.
    set(".bz", -60.0);
    auto kept = step();
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(kept[i], h[i], 1e-9);
    // z -> 1, r -> 0: the state is replaced by tanh(x Wn^T + bn).
    set(".bz", 60.0);
    set(".br", -60.0);
    auto replaced = step();
    for (std::size_t j = 0; j < h.size(); ++j) {
      double s = store.at(prefix + ".bn")[j];
      for (std::size_t k = 0; k < x.size(); ++k) s += store.at(prefix + ".wn").at({j, k}) * x[k];
      EXPECT_NEAR(replaced[j], std::tanh(s), 1e-9);
    }
  }
}

TEST(Context, GapIsTheTemporalMeanOfSpatialMeans) {
  auto cfg = oracle::reasoning_model();
  cfg.context.aggregation = Aggregation::gap;
  ParamStore<double> store;
  std::mt19937_64 rng(5);
  context::add_params(store, cfg, rng);
  EXPECT_EQ(store.size(), 0u);
  EXPECT_EQ(context::output_dim(cfg), cfg.backbone.activity_channels());
  ad::Graph<double> g;
  Bindings<double> p(g, store);
  Tensord vmap({2, 3, 2, 2});
  for (std::size_t i = 0; i < vmap.size(); ++i) vmap[i] = static_cast<double>(i);
  auto v = context::gap(g.constant(vmap));
  EXPECT_EQ(v.shape(), (Shape{3, 2}));
  auto out = context::run_context(p, cfg, v);
  // channel 0 frames hold 0..3, 4..7, 8..11 -> means 1.5, 5.5, 9.5 -> 5.5
  EXPECT_DOUBLE_EQ(out.h.value()[0], 5.5);
  EXPECT_DOUBLE_EQ(out.h.value()[1], 17.5);
}

TEST(Context, RecurrentSummaries) {
  auto cfg = oracle::reasoning_model();
  cfg.context.state_dim = 3;
  ParamStore<double> store;
  std::mt19937_64 rng(6);
  context::add_params(store, cfg, rng);
  const auto v = oracle::random_rows<double>(4, cfg.backbone.activity_channels(), rng);
  auto run = [&](StateSummary s) {
    cfg.context.summary = s;
    ad::Graph<double> g;
    Bindings<double> p(g, store);
    auto out = context::run_context(p, cfg, g.constant(v));
    std::vector<double> sum(3, 0.0);
    for (const auto& st : out.states) {
      for (std::size_t i = 0; i < 3; ++i) sum[i] += st.value()[i];
    }
    const auto last = out.states.back().value();
    return std::make_tuple(Tensord(out.h.value()), sum, Tensord(last));
  };
  const auto [h_sum, sum, last_sum] = run(StateSummary::sum);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(h_sum[i], sum[i]);
  const auto [h_last, sum2, last] = run(StateSummary::last);
  EXPECT_EQ(h_last, last);
}
