#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "orn/config.hpp"
#include "orn/ops.hpp"
#include "orn/params.hpp"

namespace orn {

template <typename T>
struct FeatureMaps {
  ad::Var<T> object;    // U [D_u, T, H_u, W_u]
  ad::Var<T> activity;  // V [D_v, T, H_v, W_v]
};

// Tiny spatio-temporal trunk. Blocks before `split_at` are shared; the rest
// are instantiated twice, once per head. A block is
//   2D:   conv k x k (stride s) -> ReLU
//   3D:   conv kt x k x k (stride s) -> ReLU
//   2p5D: conv k x k (stride s) -> ReLU -> conv kt x 1 x 1 -> ReLU
// with zero spatial padding (k-1)/2 and temporal padding (kt-1)/2.
namespace backbone {

// Parameter name prefixes of block `i`, one per copy (shared, or activity and
// object heads).
std::vector<std::string> block_prefixes(const BackboneConfig& cfg, std::size_t block);

template <typename T>
void add_params(ParamStore<T>& store, const BackboneConfig& cfg, std::mt19937_64& rng);

// clip [C_in, T, H, W] -> FeatureMaps. The temporal length is asserted at
// every block.
template <typename T>
FeatureMaps<T> forward(Bindings<T>& p, const BackboneConfig& cfg, const ad::Var<T>& clip);

// Same trunk but stops after the activity head (object head skipped).
template <typename T>
ad::Var<T> forward_activity(Bindings<T>& p, const BackboneConfig& cfg, const ad::Var<T>& clip);

// Object head only.
template <typename T>
ad::Var<T> forward_object(Bindings<T>& p, const BackboneConfig& cfg, const ad::Var<T>& clip);

// Config with block `block` switched to `mode`.
BackboneConfig inflate(const BackboneConfig& cfg, std::size_t block, Inflation mode);

// Parameters for inflate(cfg, block, mode) derived from 2D weights: 2p5D keeps
// the spatial kernel and adds a centred identity temporal kernel; 3D places
// the 2D kernel at the centre tap. Either way the block computes the same
// function per frame as before. Entries of other blocks are copied.
template <typename T>
ParamStore<T> inflate_params(const ParamStore<T>& store, const BackboneConfig& cfg, std::size_t block,
                             Inflation mode);

// Parameter count of the backbone (weights and biases).
std::size_t parameter_count(const BackboneConfig& cfg);

// Rows of the kernel-inflation ablation: an inflation per block of a
// five-block trunk plus the temporal aggregation of the activity head.
struct InflationRow {
  std::array<Inflation, 5> blocks;
  Aggregation aggregation;
};

std::vector<InflationRow> inflation_grid();

// Five-block trunk used by the inflation grid.
BackboneConfig five_block_backbone();

BackboneConfig apply_row(const BackboneConfig& five_block, const InflationRow& row);

}  // namespace backbone
}  // namespace orn
