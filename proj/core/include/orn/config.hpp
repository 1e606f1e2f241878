#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace orn {

// ---------------------------------------------------------------- backbone

enum class Inflation { k2D, k3D, k2p5D };

struct BlockConfig {
  std::size_t channels_out = 16;
  Inflation inflation = Inflation::k2D;
  std::size_t spatial_stride = 2;

  friend bool operator==(const BlockConfig&, const BlockConfig&) = default;
};

struct BackboneConfig {
  std::vector<BlockConfig> blocks;
  // First block of the two heads; blocks before it are shared.
  std::size_t split_at = 3;
  // Stride of the final object-head block.
  std::size_t object_head_stride_override = 1;
  std::size_t in_channels = 3;
  std::size_t kernel = 3;
  std::size_t temporal_kernel = 3;

  // Throws ConfigError for an inconsistent block list or when an H x W input
  // is not divisible by the strides of either head.
  void validate(std::size_t height, std::size_t width) const;
  void validate() const;

  std::size_t activity_stride() const;
  std::size_t object_stride() const;
  std::size_t activity_channels() const { return blocks.back().channels_out; }
  std::size_t object_channels() const { return blocks.back().channels_out; }

  friend bool operator==(const BackboneConfig&, const BackboneConfig&) = default;
};

// 4 blocks, channels 16/32/64/64, strides 2/2/1/2, object head stride 1,
// first and last blocks inflated to 2.5D.
BackboneConfig default_backbone();

// -------------------------------------------------------------- descriptors

struct FeatureSubset {
  bool shape = true;
  bool appearance = true;
  bool object_class = true;

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;
};

struct DescriptorConfig {
  std::size_t mask_grid = 14;
  std::size_t shape_hidden = 32;
  std::size_t shape_dim = 8;  // d_b
  std::size_t num_object_classes = 6;
  std::size_t max_objects = 8;  // per frame
  FeatureSubset features;

  friend bool operator==(const DescriptorConfig&, const DescriptorConfig&) = default;
};

// ---------------------------------------------------------------- reasoning

enum class PairingMode { inter_frame, intra_frame, pixel_cells };
enum class TPrimePolicy { uniform_past, previous_frame };
enum class FPhiKind { recurrent, mlp };
// canonical: clique terms are summed in an order fixed by their content, so
// permuting objects changes nothing bitwise. enumeration: in clique order.
enum class ReductionOrder { canonical, enumeration };

struct PairingConfig {
  PairingMode mode = PairingMode::inter_frame;
  std::size_t clique_size = 2;
  TPrimePolicy t_prime_policy = TPrimePolicy::uniform_past;
  FPhiKind f_phi_kind = FPhiKind::recurrent;
  ReductionOrder reduction = ReductionOrder::canonical;
  // Clique-1 terms cover both frames; false restricts them to frame t.
  bool unary_both_frames = true;
  std::size_t pixel_grid = 7;

  void validate() const;
  friend bool operator==(const PairingConfig&, const PairingConfig&) = default;
};

struct ReasoningConfig {
  std::size_t relation_hidden = 64;  // d_h
  std::size_t relation_dim = 64;     // H
  std::size_t state_dim = 64;        // d_r
  std::size_t mlp_hidden = 64;       // f_phi when kind == mlp

  friend bool operator==(const ReasoningConfig&, const ReasoningConfig&) = default;
};

// ------------------------------------------------------------------ context

enum class Aggregation { recurrent, gap };
enum class StateSummary { sum, last };

struct ContextConfig {
  std::size_t state_dim = 64;  // d_s
  Aggregation aggregation = Aggregation::recurrent;
  StateSummary summary = StateSummary::sum;

  friend bool operator==(const ContextConfig&, const ContextConfig&) = default;
};

// -------------------------------------------------------------------- model

enum class HeadsMode { two_heads, activity_only, object_only };

struct ModelConfig {
  BackboneConfig backbone = default_backbone();
  DescriptorConfig descriptors;
  PairingConfig pairing;
  ReasoningConfig reasoning;
  ContextConfig context;
  HeadsMode heads = HeadsMode::two_heads;
  std::size_t num_activities = 2;
  bool multi_label = false;
  bool soft_aux_targets = false;
  std::size_t frame_height = 32;
  std::size_t frame_width = 32;

  void validate() const;
  std::size_t descriptor_dim() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// ---------------------------------------------------------------- training

struct OptimizerConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct TrainConfig {
  std::size_t clip_length = 4;
  std::size_t batch_size = 8;
  std::size_t epochs = 30;
  std::size_t patience = 5;
  std::size_t phase1_epochs = 0;
  std::uint64_t seed = 1;
  std::uint64_t eval_seed = 7;
  std::size_t eval_clips = 10;
  std::size_t workers = 1;
  bool log_wall_time = true;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// ---------------------------------------------------------- synthetic data

enum class TaskKind { ordered_swap, touch, state_change, appear_disappear };

struct WorldConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t num_frames = 8;
  // Archetype ids (0..5: square, disc, triangle, bar, cross, ring).
  std::vector<std::size_t> object_classes = {0, 1, 2, 3, 4, 5};
  TaskKind task = TaskKind::ordered_swap;
  std::uint64_t seed = 1;
  std::size_t object_size = 6;
  std::size_t speed = 2;       // pixels per frame
  std::size_t lag = 4;         // frames between leader and follower
  std::size_t distractors = 0;
  // Noisy-detector mode: drop annotations with this probability and jitter
  // mask boundaries.
  double drop_probability = 0.0;
  bool jitter_masks = false;
  std::size_t train_videos = 2000;
  std::size_t val_videos = 500;

  void validate() const;
  std::size_t num_activities() const;
  bool multi_label() const { return task == TaskKind::touch; }
  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

// Ablation axes: name -> values. Names: pairing_mode, clique_size, f_phi,
// features, inflation (row index of the inflation grid), aggregation, heads.
struct AblationConfig {
  std::map<std::string, std::vector<std::string>> axes = {{"clique_size", {"1", "2", "3"}}};
  std::size_t seeds = 5;

  friend bool operator==(const AblationConfig&, const AblationConfig&) = default;
};

struct ExperimentConfig {
  ModelConfig model;
  OptimizerConfig optimizer;
  TrainConfig train;
  WorldConfig world;
  AblationConfig ablation;

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// JSON text <-> config. Unknown keys are rejected; missing keys keep their
// defaults.
std::string to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const std::string& text);
std::string to_json(const ModelConfig& cfg);
ModelConfig model_from_json(const std::string& text);

ExperimentConfig load_experiment(const std::string& path);
void save_experiment(const ExperimentConfig& cfg, const std::string& path);

std::string to_string(Inflation v);
std::string to_string(PairingMode v);
std::string to_string(FPhiKind v);
std::string to_string(TaskKind v);
std::string to_string(Aggregation v);
std::string to_string(HeadsMode v);

}  // namespace orn
