#include "orn/context.hpp"

#include "orn/error.hpp"
#include "orn/nn.hpp"

namespace orn::context {

std::size_t output_dim(const ModelConfig& cfg) {
  return cfg.context.aggregation == Aggregation::gap ? cfg.backbone.activity_channels() : cfg.context.state_dim;
}

template <typename T>
void add_params(ParamStore<T>& store, const ModelConfig& cfg, std::mt19937_64& rng) {
  if (cfg.context.aggregation == Aggregation::recurrent) {
    nn::add_gru(store, "context.f", cfg.backbone.activity_channels(), cfg.context.state_dim, rng);
  }
}

template <typename T>
ad::Var<T> gap(const ad::Var<T>& v) {
  return ad::spatial_mean(v);
}

template <typename T>
ContextOutput<T> run_context(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& v) {
  if (v.shape().size() != 2) throw DimensionError("run_context expects [L, D_v], got " + to_string(v.shape()));
  const std::size_t steps = v.dim(0);
  if (steps == 0) throw DimensionError("run_context: empty clip");
  ContextOutput<T> out;
  if (cfg.context.aggregation == Aggregation::gap) {
    out.h = ad::reshape(ad::mean_axis(v, 0), {1, v.dim(1)});
    return out;
  }
  auto s = p.graph().constant(Tensor<T>({1, cfg.context.state_dim}));
  for (std::size_t t = 0; t < steps; ++t) {
    s = nn::gru_step(p, "context.f", ad::gather_rows(v, std::span<const std::size_t>(&t, 1)), s);
    out.states.push_back(s);
    out.h = t == 0 ? s : ad::add(out.h, s);
  }
  if (cfg.context.summary == StateSummary::last) out.h = s;
  return out;
}

#define ORN_INSTANTIATE_CONTEXT(T)                                                   \
  template void add_params<T>(ParamStore<T>&, const ModelConfig&, std::mt19937_64&); \
  template ad::Var<T> gap<T>(const ad::Var<T>&);                                     \
  template ContextOutput<T> run_context<T>(Bindings<T>&, const ModelConfig&, const ad::Var<T>&);

ORN_INSTANTIATE_CONTEXT(float)
ORN_INSTANTIATE_CONTEXT(double)

}  // namespace orn::context
