#pragma once

#include <random>
#include <vector>

#include "orn/config.hpp"
#include "orn/ops.hpp"
#include "orn/params.hpp"

// Context stream over the activity-head features V.
namespace orn::context {

// Width of the context summary h: d_s for the recurrent unit, D_v for GAP.
std::size_t output_dim(const ModelConfig& cfg);

// GRU `context.f` (D_v -> d_s) in recurrent mode; nothing for GAP.
template <typename T>
void add_params(ParamStore<T>& store, const ModelConfig& cfg, std::mt19937_64& rng);

// V [D_v, T, H_v, W_v] -> [T, D_v], per-frame spatial mean.
template <typename T>
ad::Var<T> gap(const ad::Var<T>& v);

template <typename T>
struct ContextOutput {
  ad::Var<T> h;                    // [1, output_dim]
  std::vector<ad::Var<T>> states;  // s_1 .. s_L (recurrent only)
};

// v [L, D_v]. Recurrent: s_t = GRU(v_t, s_{t-1}), s_0 = 0, h = sum of s_t (or
// s_L). GAP: h = temporal mean of v_t.
template <typename T>
ContextOutput<T> run_context(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& v);

}  // namespace orn::context
