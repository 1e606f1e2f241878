#include "orn/backbone.hpp"

namespace orn::backbone {

namespace {

struct BlockShapes {
  std::size_t in, out;
};

std::vector<BlockShapes> channel_plan(const BackboneConfig& cfg) {
  std::vector<BlockShapes> plan;
  std::size_t in = cfg.in_channels;
  for (const auto& b : cfg.blocks) {
    plan.push_back({in, b.channels_out});
    in = b.channels_out;
  }
  return plan;
}

template <typename T>
void add_block(ParamStore<T>& store, const std::string& prefix, const BackboneConfig& cfg, std::size_t in,
               std::size_t out, Inflation mode, std::mt19937_64& rng) {
  const std::size_t k = cfg.kernel, kt = cfg.temporal_kernel;
  const std::size_t spatial_kt = mode == Inflation::k3D ? kt : 1;
  const std::size_t taps = spatial_kt * k * k;
  store.add(prefix + ".spatial.w", glorot_uniform<T>({out, in, spatial_kt, k, k}, in * taps, out * taps, rng));
  store.add(prefix + ".spatial.b", Tensor<T>({out}));
  if (mode == Inflation::k2p5D) {
    store.add(prefix + ".temporal.w", glorot_uniform<T>({out, out, kt, 1, 1}, out * kt, out * kt, rng));
    store.add(prefix + ".temporal.b", Tensor<T>({out}));
  }
}

template <typename T>
ad::Var<T> run_block(Bindings<T>& p, const std::string& prefix, const BackboneConfig& cfg, Inflation mode,
                     std::size_t stride, const ad::Var<T>& x) {
  const std::size_t frames = x.dim(1);
  const std::size_t pad_s = (cfg.kernel - 1) / 2;
  const std::size_t pad_t = (cfg.temporal_kernel - 1) / 2;
  ad::ConvSpec spatial{stride, mode == Inflation::k3D ? pad_t : 0, pad_s};
  auto y = ad::relu(ad::conv3d(x, p(prefix + ".spatial.w"), p(prefix + ".spatial.b"), spatial));
  if (mode == Inflation::k2p5D) {
    ad::ConvSpec temporal{1, pad_t, 0};
    y = ad::relu(ad::conv3d(y, p(prefix + ".temporal.w"), p(prefix + ".temporal.b"), temporal));
  }
  if (y.dim(1) != frames) {
    throw DimensionError("block " + prefix + " changed the temporal length from " + std::to_string(frames) +
                         " to " + std::to_string(y.dim(1)));
  }
  return y;
}

}  // namespace

std::vector<std::string> block_prefixes(const BackboneConfig& cfg, std::size_t block) {
  if (block >= cfg.blocks.size()) throw ConfigError("block index " + std::to_string(block) + " out of range");
  const std::string id = std::to_string(block);
  if (block < cfg.split_at) return {"backbone.shared." + id};
  return {"backbone.activity." + id, "backbone.object." + id};
}

template <typename T>
void add_params(ParamStore<T>& store, const BackboneConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const auto plan = channel_plan(cfg);
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    for (const auto& prefix : block_prefixes(cfg, i)) {
      add_block(store, prefix, cfg, plan[i].in, plan[i].out, cfg.blocks[i].inflation, rng);
    }
  }
}

template <typename T>
FeatureMaps<T> forward(Bindings<T>& p, const BackboneConfig& cfg, const ad::Var<T>& clip) {
  if (clip.shape().size() != 4 || clip.dim(0) != cfg.in_channels) {
    throw DimensionError("backbone input must be [" + std::to_string(cfg.in_channels) + ",T,H,W], got " +
                         to_string(clip.shape()));
  }
  ad::Var<T> x = clip;
  for (std::size_t i = 0; i < cfg.split_at; ++i) {
    x = run_block(p, "backbone.shared." + std::to_string(i), cfg, cfg.blocks[i].inflation,
                  cfg.blocks[i].spatial_stride, x);
  }
  ad::Var<T> act = x, obj = x;
  for (std::size_t i = cfg.split_at; i < cfg.blocks.size(); ++i) {
    const auto& b = cfg.blocks[i];
    const bool last = i + 1 == cfg.blocks.size();
    act = run_block(p, "backbone.activity." + std::to_string(i), cfg, b.inflation, b.spatial_stride, act);
    obj = run_block(p, "backbone.object." + std::to_string(i), cfg, b.inflation,
                    last ? cfg.object_head_stride_override : b.spatial_stride, obj);
  }
  return {obj, act};
}

template <typename T>
ad::Var<T> forward_activity(Bindings<T>& p, const BackboneConfig& cfg, const ad::Var<T>& clip) {
  ad::Var<T> x = clip;
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    const auto& b = cfg.blocks[i];
    const std::string prefix =
        i < cfg.split_at ? "backbone.shared." + std::to_string(i) : "backbone.activity." + std::to_string(i);
    x = run_block(p, prefix, cfg, b.inflation, b.spatial_stride, x);
  }
  return x;
}

template <typename T>
ad::Var<T> forward_object(Bindings<T>& p, const BackboneConfig& cfg, const ad::Var<T>& clip) {
  ad::Var<T> x = clip;
  for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
    const auto& b = cfg.blocks[i];
    const bool last = i + 1 == cfg.blocks.size();
    const std::string prefix =
        i < cfg.split_at ? "backbone.shared." + std::to_string(i) : "backbone.object." + std::to_string(i);
    x = run_block(p, prefix, cfg, b.inflation, last ? cfg.object_head_stride_override : b.spatial_stride, x);
  }
  return x;
}

BackboneConfig inflate(const BackboneConfig& cfg, std::size_t block, Inflation mode) {
  if (block >= cfg.blocks.size()) throw ConfigError("block index " + std::to_string(block) + " out of range");
  BackboneConfig out = cfg;
  out.blocks[block].inflation = mode;
  return out;
}

template <typename T>
ParamStore<T> inflate_params(const ParamStore<T>& store, const BackboneConfig& cfg, std::size_t block,
                             Inflation mode) {
  if (block >= cfg.blocks.size()) throw ConfigError("block index " + std::to_string(block) + " out of range");
  if (cfg.blocks[block].inflation != Inflation::k2D) {
    throw ConfigError("only 2D blocks can be inflated");
  }
  const auto prefixes = block_prefixes(cfg, block);
  const std::size_t kt = cfg.temporal_kernel, k = cfg.kernel, centre = (kt - 1) / 2;
  ParamStore<T> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.name(i);
    const Tensor<T>& value = store.value(i);
    std::string owner;
    for (const auto& pre : prefixes) {
      if (name == pre + ".spatial.w" || name == pre + ".spatial.b") owner = pre;
    }
    if (owner.empty() || mode == Inflation::k2D) {
      out.add(name, value);
      continue;
    }
    if (name == owner + ".spatial.b") {
      out.add(name, value);
      if (mode == Inflation::k2p5D) {
        const std::size_t c = value.size();
        Tensor<T> w({c, c, kt, 1, 1});
        for (std::size_t o = 0; o < c; ++o) w.at({o, o, centre, 0, 0}) = T{1};
        out.add(owner + ".temporal.w", std::move(w));
        out.add(owner + ".temporal.b", Tensor<T>({c}));
      }
      continue;
    }
    // spatial weight
    if (mode == Inflation::k2p5D) {
      out.add(name, value);
    } else {
      const std::size_t co = value.dim(0), ci = value.dim(1);
      Tensor<T> w({co, ci, kt, k, k});
      for (std::size_t o = 0; o < co; ++o) {
        for (std::size_t c = 0; c < ci; ++c) {
          for (std::size_t y = 0; y < k; ++y) {
            for (std::size_t x = 0; x < k; ++x) w.at({o, c, centre, y, x}) = value.at({o, c, 0, y, x});
          }
        }
      }
      out.add(name, std::move(w));
    }
  }
  return out;
}

std::size_t parameter_count(const BackboneConfig& cfg) {
  ParamStore<float> store;
  std::mt19937_64 rng(0);
  add_params(store, cfg, rng);
  return store.parameter_count();
}

std::vector<InflationRow> inflation_grid() {
  using I = Inflation;
  const I d2 = I::k2D, d3 = I::k3D, d25 = I::k2p5D;
  return {
      {{d2, d2, d2, d2, d2}, Aggregation::gap},       {{d2, d2, d2, d2, d2}, Aggregation::recurrent},
      {{d3, d3, d3, d3, d3}, Aggregation::gap},       {{d25, d25, d25, d25, d25}, Aggregation::gap},
      {{d2, d2, d2, d2, d3}, Aggregation::gap},       {{d2, d2, d2, d3, d3}, Aggregation::gap},
      {{d2, d2, d3, d3, d3}, Aggregation::gap},       {{d2, d2, d2, d2, d25}, Aggregation::gap},
      {{d2, d2, d2, d25, d25}, Aggregation::gap},     {{d2, d2, d25, d25, d25}, Aggregation::gap},
      {{d3, d2, d2, d2, d2}, Aggregation::gap},       {{d3, d3, d2, d2, d2}, Aggregation::gap},
      {{d25, d2, d2, d2, d2}, Aggregation::gap},      {{d25, d25, d2, d2, d2}, Aggregation::gap},
  };
}

BackboneConfig five_block_backbone() {
  BackboneConfig cfg;
  cfg.blocks = {{8, Inflation::k2D, 2},
                {16, Inflation::k2D, 1},
                {16, Inflation::k2D, 2},
                {32, Inflation::k2D, 1},
                {32, Inflation::k2D, 2}};
  cfg.split_at = 4;
  cfg.object_head_stride_override = 1;
  return cfg;
}

BackboneConfig apply_row(const BackboneConfig& five_block, const InflationRow& row) {
  if (five_block.blocks.size() != row.blocks.size()) {
    throw ConfigError("inflation rows describe a five-block trunk");
  }
  BackboneConfig out = five_block;
  for (std::size_t i = 0; i < row.blocks.size(); ++i) out.blocks[i].inflation = row.blocks[i];
  return out;
}

template void add_params<float>(ParamStore<float>&, const BackboneConfig&, std::mt19937_64&);
template void add_params<double>(ParamStore<double>&, const BackboneConfig&, std::mt19937_64&);
template FeatureMaps<float> forward<float>(Bindings<float>&, const BackboneConfig&, const ad::Var<float>&);
template FeatureMaps<double> forward<double>(Bindings<double>&, const BackboneConfig&, const ad::Var<double>&);
template ad::Var<float> forward_activity<float>(Bindings<float>&, const BackboneConfig&, const ad::Var<float>&);
template ad::Var<double> forward_activity<double>(Bindings<double>&, const BackboneConfig&, const ad::Var<double>&);
template ad::Var<float> forward_object<float>(Bindings<float>&, const BackboneConfig&, const ad::Var<float>&);
template ad::Var<double> forward_object<double>(Bindings<double>&, const BackboneConfig&, const ad::Var<double>&);
template ParamStore<float> inflate_params<float>(const ParamStore<float>&, const BackboneConfig&, std::size_t,
                                                 Inflation);
template ParamStore<double> inflate_params<double>(const ParamStore<double>&, const BackboneConfig&, std::size_t,
                                                   Inflation);

}  // namespace orn::backbone
