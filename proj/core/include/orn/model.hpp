#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "orn/config.hpp"
#include "orn/context.hpp"
#include "orn/descriptors.hpp"
#include "orn/reasoning.hpp"
#include "orn/recognition.hpp"

namespace orn {

// One detected object of one clip frame, ready for the descriptor stage.
struct FrameObject {
  std::vector<float> class_distribution;  // C
  std::vector<float> mask_grid;           // g*g, from resize_mask
  std::vector<std::size_t> cells;         // mask_cells at the object map resolution
  std::size_t instance_index = 0;
  std::size_t class_id = 0;
};

// Builds a FrameObject from an annotation for a model with `cfg`.
FrameObject prepare_object(const InstanceAnnotation& a, const ModelConfig& cfg);

struct ClipInput {
  Tensorf frames;  // [3, L, H, W], values in [0, 1]
  std::vector<std::vector<FrameObject>> objects;  // per clip frame
};

template <typename T>
struct ForwardResult {
  recognition::Prediction<T> prediction;
  ad::Var<T> aux_logits;   // [N, C], unset without objects
  Tensor<T> aux_targets;   // [N, C] class distributions
  reasoning::ClipDescriptors<T> descriptors;
  std::vector<std::size_t> descriptor_classes;  // class id per descriptor row (object mode)
  reasoning::ReasoningOutput<T> reasoning;      // object head only
  context::ContextOutput<T> context;            // activity head only
};

// Every parameter of the model, registered in a fixed order from `seed`.
template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

// Full forward pass of one clip. `rng` drives the t' sampling.
template <typename T>
ForwardResult<T> forward(Bindings<T>& p, const ModelConfig& cfg, const ClipInput& clip, std::mt19937_64& rng);

// Descriptor rows [N, D] of a clip given the object feature map U; also
// returns the pooled appearance rows [N, D_u] used by the aux classifier.
template <typename T>
struct ObjectRows {
  reasoning::ClipDescriptors<T> descriptors;
  ad::Var<T> appearance;
  Tensor<T> class_targets;
  std::vector<std::size_t> classes;
};
template <typename T>
ObjectRows<T> object_descriptors(Bindings<T>& p, const ModelConfig& cfg, const ClipInput& clip, const ad::Var<T>& u);

// Names of the parameters trained in the first (object head only) phase.
bool is_object_head_param(const std::string& name);

}  // namespace orn
