#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "orn/config.hpp"

namespace orn::ablation {

// Sets one axis of `cfg`. Axes and values:
//   pairing_mode  inter_frame | intra_frame | pixel_cells
//   clique_size   1 | 2 | 3
//   f_phi         recurrent | mlp
//   features      all | shape | appearance | class, or a '+' joined subset
//   inflation     row index into the inflation grid (five-block trunk)
//   aggregation   recurrent | gap
//   heads         two_heads | activity_only | object_only
// Throws ConfigError for an unknown axis or value.
void apply_setting(ExperimentConfig& cfg, const std::string& axis, const std::string& value);

struct Variant {
  std::string name;  // "axis=value;axis=value"
  std::vector<std::pair<std::string, std::string>> settings;
  ExperimentConfig config;
};

// Cross product of cfg.ablation.axes, axes in name order.
std::vector<Variant> expand(const ExperimentConfig& base);

struct RunRow {
  std::string variant;
  std::vector<std::pair<std::string, std::string>> settings;
  std::uint64_t seed = 0;
  double top1 = 0.0;
  double mAP = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
};

std::string csv_header(const ExperimentConfig& base);
std::string csv_row(const RunRow& row);

// For each seed in first_seed .. first_seed + seeds - 1: generates the train
// and val sets with that world seed and trains every variant with that model
// seed. Rows are reported through `on_row` as they finish.
std::vector<RunRow> run(const ExperimentConfig& base, std::uint64_t first_seed,
                        const std::function<void(const RunRow&)>& on_row = {});

}  // namespace orn::ablation
