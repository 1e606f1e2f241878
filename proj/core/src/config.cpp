#include "orn/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "config_json.hpp"
#include "orn/error.hpp"
#include "orn/world.hpp"

namespace orn {

using nlohmann::json;

BackboneConfig default_backbone() {
  BackboneConfig cfg;
  cfg.blocks = {{16, Inflation::k2p5D, 2}, {32, Inflation::k2D, 2}, {64, Inflation::k2D, 1}, {64, Inflation::k2p5D, 2}};
  cfg.split_at = 3;
  cfg.object_head_stride_override = 1;
  return cfg;
}

void BackboneConfig::validate() const {
  if (blocks.empty()) throw ConfigError("backbone needs at least one block");
  if (split_at >= blocks.size()) {
    throw ConfigError("split_at " + std::to_string(split_at) + " must be below the block count " +
                      std::to_string(blocks.size()));
  }
  if (kernel == 0 || kernel % 2 == 0) throw ConfigError("spatial kernel must be odd");
  if (temporal_kernel == 0 || temporal_kernel % 2 == 0) {
    throw ConfigError("temporal kernel must be odd so that the temporal length is preserved");
  }
  if (object_head_stride_override == 0) throw ConfigError("object head stride must be positive");
  for (const auto& b : blocks) {
    if (b.channels_out == 0 || b.spatial_stride == 0) throw ConfigError("block channels and stride must be positive");
  }
}

std::size_t BackboneConfig::activity_stride() const {
  std::size_t s = 1;
  for (const auto& b : blocks) s *= b.spatial_stride;
  return s;
}

std::size_t BackboneConfig::object_stride() const {
  std::size_t s = 1;
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) s *= blocks[i].spatial_stride;
  return s * object_head_stride_override;
}

void BackboneConfig::validate(std::size_t height, std::size_t width) const {
  validate();
  // Every intermediate resolution must divide evenly.
  auto check = [&](std::size_t h, std::size_t w, std::size_t stride, std::size_t block) {
    if (h % stride != 0 || w % stride != 0) {
      throw ConfigError("input " + std::to_string(height) + "x" + std::to_string(width) +
                        " not divisible by the strides at block " + std::to_string(block));
    }
  };
  std::size_t h = height, w = width;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    check(h, w, blocks[i].spatial_stride, i);
    if (i + 1 == blocks.size()) check(h, w, object_head_stride_override, i);
    h /= blocks[i].spatial_stride;
    w /= blocks[i].spatial_stride;
  }
  if (h == 0 || w == 0) throw ConfigError("strides reduce the input to nothing");
}

void PairingConfig::validate() const {
  if (clique_size < 1 || clique_size > 3) throw ConfigError("clique size must be 1, 2 or 3");
  if (mode == PairingMode::intra_frame && clique_size != 2) {
    throw ConfigError("intra-frame pairing uses cliques of size 2");
  }
  if (mode == PairingMode::pixel_cells && pixel_grid == 0) throw ConfigError("pixel grid must be positive");
}

std::size_t ModelConfig::descriptor_dim() const {
  return descriptors.shape_dim + backbone.object_channels() + descriptors.num_object_classes;
}

void ModelConfig::validate() const {
  backbone.validate(frame_height, frame_width);
  pairing.validate();
  if (num_activities == 0) throw ConfigError("num_activities must be positive");
  if (descriptors.mask_grid == 0 || descriptors.shape_dim == 0 || descriptors.num_object_classes == 0) {
    throw ConfigError("descriptor dimensions must be positive");
  }
  if (descriptors.max_objects == 0) throw ConfigError("max_objects must be positive");
  if (pairing.mode == PairingMode::pixel_cells && pairing.pixel_grid > frame_height / backbone.object_stride()) {
    throw ConfigError("pixel grid larger than the object feature map");
  }
}

void WorldConfig::validate() const {
  if (height < 32 || width < 32) throw ConfigError("synthetic frames must be at least 32x32");
  if (num_frames < 2) throw ConfigError("synthetic videos need at least 2 frames");
  if (object_classes.size() < 2) throw ConfigError("need at least two object classes");
  for (auto c : object_classes) {
    if (c >= 6) throw ConfigError("object archetype id " + std::to_string(c) + " out of range");
    if (std::count(object_classes.begin(), object_classes.end(), c) > 1) {
      throw ConfigError("object archetype id " + std::to_string(c) + " listed twice");
    }
  }
  if (object_size < 3) throw ConfigError("object size must be at least 3");
  if (drop_probability < 0.0 || drop_probability >= 1.0) throw ConfigError("drop probability must be in [0,1)");
}

std::size_t WorldConfig::num_activities() const {
  switch (task) {
    case TaskKind::ordered_swap:
      return 2;
    case TaskKind::touch:
    case TaskKind::state_change:
      return object_classes.size();
    case TaskKind::appear_disappear:
      return 2 * object_classes.size();
  }
  return 0;
}

void ExperimentConfig::validate() const {
  model.validate();
  world.validate();
  if (train.clip_length == 0) throw ConfigError("clip length must be positive");
  if (train.batch_size == 0) throw ConfigError("batch size must be positive");
  if (train.eval_clips == 0) throw ConfigError("eval clips must be positive");
  if (optimizer.lr < 0.0) throw ConfigError("learning rate must be non-negative");
  if (model.frame_height != world.height || model.frame_width != world.width) {
    throw ConfigError("model frame size differs from the synthetic world frame size");
  }
  if (model.num_activities != world.num_activities() || model.multi_label != world.multi_label()) {
    throw ConfigError("model.num_activities must be " + std::to_string(world.num_activities()) +
                      " and model.multi_label " + (world.multi_label() ? "true" : "false") + " for task " +
                      to_string(world.task));
  }
  if (model.descriptors.num_object_classes != world::kArchetypes) {
    throw ConfigError("model.descriptors.num_object_classes must equal the 6 world archetypes");
  }
}

namespace {

// Rejects keys in `patch` that the default document does not have.
void check_keys(const json& reference, const json& patch, const std::string& path) {
  if (!patch.is_object() || !reference.is_object()) return;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (!reference.contains(it.key())) throw ConfigError("unknown config key " + path + it.key());
    if (path + it.key() == "ablation.axes") continue;  // free-form map
    check_keys(reference.at(it.key()), it.value(), path + it.key() + ".");
  }
}

template <typename Cfg>
Cfg parse_strict(const std::string& text) {
  json patch;
  try {
    patch = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  json full = Cfg{};
  check_keys(full, patch, "");
  full.merge_patch(patch);
  // The axes map replaces the default rather than merging into it.
  if (patch.contains("ablation") && patch["ablation"].contains("axes")) {
    full["ablation"]["axes"] = patch["ablation"]["axes"];
  }
  Cfg cfg;
  try {
    cfg = full.get<Cfg>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  // Unknown enum strings and out-of-range numbers do not survive a round trip.
  const json back = cfg;
  if (back != full) {
    const auto diff = json::diff(full, back);
    throw ConfigError("invalid config value at " + diff.at(0).value("path", std::string("?")));
  }
  return cfg;
}

}  // namespace

std::string to_json(const ExperimentConfig& cfg) { return json(cfg).dump(2); }
std::string to_json(const ModelConfig& cfg) { return json(cfg).dump(); }

ExperimentConfig experiment_from_json(const std::string& text) { return parse_strict<ExperimentConfig>(text); }
ModelConfig model_from_json(const std::string& text) { return parse_strict<ModelConfig>(text); }

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str());
}

void save_experiment(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path);
  out << to_json(cfg) << '\n';
}

std::string to_string(Inflation v) { return json(v).get<std::string>(); }
std::string to_string(PairingMode v) { return json(v).get<std::string>(); }
std::string to_string(FPhiKind v) { return json(v).get<std::string>(); }
std::string to_string(TaskKind v) { return json(v).get<std::string>(); }
std::string to_string(Aggregation v) { return json(v).get<std::string>(); }
std::string to_string(HeadsMode v) { return json(v).get<std::string>(); }

}  // namespace orn
