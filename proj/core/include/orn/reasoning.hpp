#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "orn/config.hpp"
#include "orn/ops.hpp"
#include "orn/params.hpp"

namespace orn::reasoning {

// Past frame paired with frame t, both 1-based. Returns nullopt for t = 1.
// uniform_past draws t' uniformly from {1, ..., t-1}; previous_frame returns
// t - 1 without touching the generator.
std::optional<std::size_t> sample_t_prime(std::size_t t, TPrimePolicy policy, std::mt19937_64& rng);

// Clique member: frame 0 is t', frame 1 is t.
struct Member {
  std::size_t frame = 0;
  std::size_t index = 0;
  friend bool operator==(const Member&, const Member&) = default;
};
using Clique = std::vector<Member>;

// Cliques over the objects of frames t' (k_past) and t (k_current), members
// ordered by frame then index.
//   inter_frame, size 1: every singleton of both frames (or frame t only when
//                        unary_both_frames is off)
//   inter_frame, size 2: (j, k) with j from t' and k from t
//   inter_frame, size 3: unordered triples with a member from each frame
//   intra_frame:         unordered pairs within frame t
// pixel_cells pairs cells like inter_frame.
std::vector<Clique> enumerate_cliques(std::size_t k_past, std::size_t k_current, const PairingConfig& cfg);

// True when the clique set of `cfg` involves frame t'. Steps without a past
// frame then contribute g_t = 0.
bool needs_past(const PairingConfig& cfg);

// Width of one clique input row.
std::size_t relation_input_dim(const ModelConfig& cfg);

// h_theta: `orn.h` perceptron (clique input -> d_h -> d_h -> H, ReLU after
// every layer). f_phi: GRU `orn.f` (H -> d_r) or perceptron `orn.f_mlp`
// (H -> mlp_hidden -> d_r, tanh output).
template <typename T>
void add_params(ParamStore<T>& store, const ModelConfig& cfg, std::mt19937_64& rng);

// Descriptors of a clip stacked frame-major: frame f owns rows
// offsets[f] .. offsets[f+1] of `rows` [N, D]. `rows` is unset when N = 0.
template <typename T>
struct ClipDescriptors {
  ad::Var<T> rows;
  std::vector<std::size_t> offsets{0};

  std::size_t frames() const { return offsets.size() - 1; }
  std::size_t count(std::size_t frame) const { return offsets[frame + 1] - offsets[frame]; }
};

// One evaluated clique: the step it belongs to and the global descriptor rows
// of its members.
struct CliqueRef {
  std::size_t step = 0;
  std::vector<std::size_t> rows;
};

template <typename T>
struct Relations {
  ad::Var<T> g;                    // [L, H]
  ad::Var<T> activations;          // [cliques, H]; unset when there are none
  std::vector<CliqueRef> cliques;  // row order of `activations`
};

// g_t for every step t of the clip, all cliques evaluated in one batch.
// t_primes[t] is the 0-based past frame of step t or nullopt.
template <typename T>
Relations<T> relate_clip(Bindings<T>& p, const ModelConfig& cfg, const ClipDescriptors<T>& d,
                         std::span<const std::optional<std::size_t>> t_primes);

// g for a single frame pair: past [K', D], current [K, D] -> [1, H]. Either
// side may be unset (no objects).
template <typename T>
ad::Var<T> relate(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& past, const ad::Var<T>& current);

// r_t = f_phi(g_t, r_{t-1}); g [1,H], r_prev [1,d_r].
template <typename T>
ad::Var<T> step(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& g, const ad::Var<T>& r_prev);

template <typename T>
struct ReasoningOutput {
  ad::Var<T> r;                  // [1, d_r], sum of the per-step states
  std::vector<ad::Var<T>> states;  // r_1 .. r_L
  std::vector<std::optional<std::size_t>> t_primes;
  Relations<T> relations;
};

// Samples t' for every step from `rng`, relates, and integrates with r_0 = 0.
template <typename T>
ReasoningOutput<T> run_clip(Bindings<T>& p, const ModelConfig& cfg, const ClipDescriptors<T>& d,
                            std::mt19937_64& rng);

// Cell sets that average-pool an h x w map to a grid x grid map, one per
// output cell, for frame `frame`.
std::vector<ad::CellSet> pooling_cells(std::size_t h, std::size_t w, std::size_t grid, std::size_t frame);

// Pixel-cell descriptors from U [D_u, L, H_u, W_u]: every cell of the P x P
// pooled map becomes a descriptor with appearance = cell feature, shape slot =
// ((row + 0.5) / P, (col + 0.5) / P, 0, ...) and class slot = 0.
template <typename T>
ClipDescriptors<T> pixel_cells(const ModelConfig& cfg, const ad::Var<T>& u);

}  // namespace orn::reasoning
