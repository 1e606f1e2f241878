#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "orn/gemm.hpp"
#include "orn/model.hpp"
#include "orn/ops.hpp"
#include "orn/recognition.hpp"
#include "orn/trainer.hpp"

using namespace orn;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Tensorf random_tensor(Shape shape, std::uint64_t seed) {
  Tensorf t(shape);
  const auto v = random_vec(t.size(), seed);
  std::copy(v.begin(), v.end(), t.data().begin());
  return t;
}

}  // namespace

static void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    gemm<float>(false, true, n, n, n, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}
BENCHMARK(BM_Gemm)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

static void BM_Conv3dForwardBackward(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  const auto x = random_tensor({channels, 4, 16, 16}, 3);
  const auto w = random_tensor({channels, channels, 3, 3, 3}, 4);
  const Tensorf bias({channels});
  for (auto _ : state) {
    ad::Graph<float> g;
    auto xv = g.variable(x), wv = g.variable(w), bv = g.variable(bias);
    auto y = ad::conv3d(xv, wv, bv, {1, 1, 1});
    g.backward(ad::sum_all(y));
    benchmark::DoNotOptimize(wv.grad().data());
  }
}
BENCHMARK(BM_Conv3dForwardBackward)->Arg(8)->Arg(16);

static void BM_RelateBatched(benchmark::State& state) {
  const auto objects = static_cast<std::size_t>(state.range(0));
  const auto cfg = oracle::reasoning_model(2);
  const auto store = oracle::reasoning_params<float>(cfg, 1);
  std::mt19937_64 rng(5);
  const auto past = oracle::random_rows<float>(objects, cfg.descriptor_dim(), rng);
  const auto cur = oracle::random_rows<float>(objects, cfg.descriptor_dim(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::relate_batched(store, cfg, past, cur));
}
BENCHMARK(BM_RelateBatched)->Arg(2)->Arg(4)->Arg(8);

static void BM_TrainStep(benchmark::State& state) {
  const bool two_heads = state.range(0) != 0;
  auto cfg = fixture::small_experiment();
  if (!two_heads) cfg.model.heads = HeadsMode::activity_only;
  const auto videos = world::generate(cfg.world, 1);
  const auto prepared = train::prepare(videos, cfg.model);
  const auto params = init_params<float>(cfg.model, 1);
  std::mt19937_64 rng(6);
  for (auto _ : state) {
    ad::Graph<float> g;
    Bindings<float> p(g, params);
    const auto frames = train::sample_clip(videos[0].frames, cfg.train.clip_length, rng);
    auto fwd = forward(p, cfg.model, train::make_clip(prepared[0], frames), rng);
    auto loss = recognition::total_loss(fwd.prediction.logits, train::target_of(videos[0], false), false,
                                        fwd.aux_logits, fwd.aux_targets, false);
    g.backward(loss.total);
    benchmark::DoNotOptimize(p.gradients());
  }
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
