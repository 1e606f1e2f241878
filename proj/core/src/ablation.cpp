#include "orn/ablation.hpp"

#include <cstdio>

#include "config_json.hpp"
#include "orn/backbone.hpp"
#include "orn/error.hpp"
#include "orn/trainer.hpp"
#include "orn/world.hpp"

namespace orn::ablation {

namespace {

template <typename E>
E parse_enum(const std::string& axis, const std::string& value) {
  const nlohmann::json j = value;
  const E e = j.get<E>();
  if (nlohmann::json(e) != j) throw ConfigError("axis " + axis + ": unknown value '" + value + "'");
  return e;
}

std::size_t parse_index(const std::string& axis, const std::string& value) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != value.size()) throw ConfigError("axis " + axis + ": '" + value + "' is not an index");
  return v;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& axis, const std::string& value) {
  auto& m = cfg.model;
  if (axis == "pairing_mode") {
    m.pairing.mode = parse_enum<PairingMode>(axis, value);
  } else if (axis == "clique_size") {
    m.pairing.clique_size = parse_index(axis, value);
  } else if (axis == "f_phi") {
    m.pairing.f_phi_kind = parse_enum<FPhiKind>(axis, value);
  } else if (axis == "aggregation") {
    m.context.aggregation = parse_enum<Aggregation>(axis, value);
  } else if (axis == "heads") {
    m.heads = parse_enum<HeadsMode>(axis, value);
  } else if (axis == "features") {
    FeatureSubset f{false, false, false};
    if (value == "all") {
      f = {};
    } else {
      std::size_t start = 0;
      while (start <= value.size()) {
        const auto end = value.find('+', start);
        const std::string part = value.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (part == "shape") {
          f.shape = true;
        } else if (part == "appearance") {
          f.appearance = true;
        } else if (part == "class") {
          f.object_class = true;
        } else {
          throw ConfigError("axis features: unknown part '" + part + "'");
        }
        if (end == std::string::npos) break;
        start = end + 1;
      }
    }
    m.descriptors.features = f;
  } else if (axis == "inflation") {
    const auto grid = backbone::inflation_grid();
    const std::size_t row = parse_index(axis, value);
    if (row >= grid.size()) throw ConfigError("axis inflation: row " + value + " out of range");
    m.backbone = backbone::apply_row(backbone::five_block_backbone(), grid[row]);
    m.context.aggregation = grid[row].aggregation;
  } else {
    throw ConfigError("unknown ablation axis '" + axis + "'");
  }
}

std::vector<Variant> expand(const ExperimentConfig& base) {
  std::vector<Variant> out{{"", {}, base}};
  for (const auto& [axis, values] : base.ablation.axes) {
    if (values.empty()) throw ConfigError("ablation axis " + axis + " has no values");
    std::vector<Variant> next;
    for (const auto& v : out) {
      for (const auto& value : values) {
        Variant n = v;
        apply_setting(n.config, axis, value);
        n.settings.emplace_back(axis, value);
        n.name += (n.name.empty() ? "" : ";") + axis + "=" + value;
        next.push_back(std::move(n));
      }
    }
    out = std::move(next);
  }
  for (const auto& v : out) v.config.validate();
  return out;
}

std::string csv_header(const ExperimentConfig& base) {
  std::string h = "variant,seed";
  for (const auto& [axis, values] : base.ablation.axes) h += "," + axis;
  return h + ",top1,mAP,best_epoch,epochs";
}

std::string csv_row(const RunRow& row) {
  std::string s = "\"" + row.variant + "\"," + std::to_string(row.seed);
  for (const auto& [axis, value] : row.settings) s += "," + value;
  char buf[96];
  std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%zu,%zu", row.top1, row.mAP, row.best_epoch, row.epochs);
  return s + buf;
}

std::vector<RunRow> run(const ExperimentConfig& base, std::uint64_t first_seed,
                        const std::function<void(const RunRow&)>& on_row) {
  const auto variants = expand(base);
  std::vector<RunRow> rows;
  for (std::uint64_t s = 0; s < base.ablation.seeds; ++s) {
    const std::uint64_t seed = first_seed + s;
    WorldConfig world = base.world;
    world.seed = seed;
    const auto train_videos = world::generate(world, world.train_videos, 0, base.train.workers);
    const auto val_videos = world::generate(world, world.val_videos, world.train_videos, base.train.workers);
    for (const auto& v : variants) {
      ExperimentConfig cfg = v.config;
      cfg.world.seed = seed;
      cfg.train.seed = seed;
      const auto tr = train::prepare(train_videos, cfg.model);
      const auto va = train::prepare(val_videos, cfg.model);
      const auto result = train::train(cfg, tr, va);
      const auto eval = train::evaluate(result.best, cfg, va, cfg.train.eval_clips, cfg.train.eval_seed);
      RunRow row{v.name, v.settings, seed, eval.top1, eval.mAP, result.best_epoch, result.epochs_completed};
      if (on_row) on_row(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace orn::ablation
