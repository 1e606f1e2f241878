#pragma once

#include <cstdint>

#include "orn/config.hpp"
#include "orn/gradcheck.hpp"
#include "orn/model.hpp"

// Micro-scale model and clip for gradient checks and tests.
namespace orn::diagnostics {

// 16 x 16 frames, 4-channel trunk, small reasoning and context widths.
ModelConfig micro_model();

// `frames` frames of random pixels with `objects` objects per frame on
// disjoint rectangles; soft random class distributions.
ClipInput micro_clip(const ModelConfig& cfg, std::size_t frames, std::size_t objects, std::uint64_t seed);

// Finite-difference check of the complete two-head loss of `clip` in 64-bit.
GradCheckReport check_model_gradients(const ModelConfig& cfg, const ClipInput& clip, std::uint64_t seed,
                                      const GradCheckOptions& options = {1e-3, true});

}  // namespace orn::diagnostics
