#pragma once

#include "json.hpp"
#include "orn/config.hpp"

namespace orn {

NLOHMANN_JSON_SERIALIZE_ENUM(Inflation, {{Inflation::k2D, "2D"}, {Inflation::k3D, "3D"}, {Inflation::k2p5D, "2p5D"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PairingMode, {{PairingMode::inter_frame, "inter_frame"},
                                           {PairingMode::intra_frame, "intra_frame"},
                                           {PairingMode::pixel_cells, "pixel_cells"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TPrimePolicy, {{TPrimePolicy::uniform_past, "uniform_past"},
                                            {TPrimePolicy::previous_frame, "previous_frame"}})
NLOHMANN_JSON_SERIALIZE_ENUM(FPhiKind, {{FPhiKind::recurrent, "recurrent"}, {FPhiKind::mlp, "mlp"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ReductionOrder, {{ReductionOrder::canonical, "canonical"},
                                              {ReductionOrder::enumeration, "enumeration"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Aggregation, {{Aggregation::recurrent, "recurrent"}, {Aggregation::gap, "gap"}})
NLOHMANN_JSON_SERIALIZE_ENUM(StateSummary, {{StateSummary::sum, "sum"}, {StateSummary::last, "last"}})
NLOHMANN_JSON_SERIALIZE_ENUM(HeadsMode, {{HeadsMode::two_heads, "two_heads"},
                                         {HeadsMode::activity_only, "activity_only"},
                                         {HeadsMode::object_only, "object_only"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TaskKind, {{TaskKind::ordered_swap, "ordered_swap"},
                                        {TaskKind::touch, "touch"},
                                        {TaskKind::state_change, "state_change"},
                                        {TaskKind::appear_disappear, "appear_disappear"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BlockConfig, channels_out, inflation, spatial_stride)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BackboneConfig, blocks, split_at, object_head_stride_override, in_channels, kernel,
                                   temporal_kernel)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FeatureSubset, shape, appearance, object_class)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DescriptorConfig, mask_grid, shape_hidden, shape_dim, num_object_classes,
                                   max_objects, features)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PairingConfig, mode, clique_size, t_prime_policy, f_phi_kind, reduction,
                                   unary_both_frames, pixel_grid)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ReasoningConfig, relation_hidden, relation_dim, state_dim, mlp_hidden)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ContextConfig, state_dim, aggregation, summary)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelConfig, backbone, descriptors, pairing, reasoning, context, heads,
                                   num_activities, multi_label, soft_aux_targets, frame_height, frame_width)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OptimizerConfig, lr, beta1, beta2, eps)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, clip_length, batch_size, epochs, patience, phase1_epochs, seed,
                                   eval_seed, eval_clips, workers, log_wall_time)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(WorldConfig, height, width, num_frames, object_classes, task, seed, object_size,
                                   speed, lag, distractors, drop_probability, jitter_masks, train_videos, val_videos)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AblationConfig, axes, seeds)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExperimentConfig, model, optimizer, train, world, ablation)

}  // namespace orn
