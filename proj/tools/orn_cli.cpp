#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "orn/ablation.hpp"
#include "orn/config.hpp"
#include "orn/diagnostics.hpp"
#include "orn/error.hpp"
#include "orn/graph.hpp"
#include "orn/io.hpp"
#include "orn/trainer.hpp"
#include "orn/world.hpp"

namespace fs = std::filesystem;
using namespace orn;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string data = "data/manifest.json";
  std::string checkpoint = "out/best.ornc";
  std::size_t clips = 10;
  double threshold = 0.0;
  std::size_t activity = 0;
  std::size_t workers = 1;
};

json flags_json(const Flags& f) {
  return {{"config", f.config},     {"seed", f.seed},   {"out", f.out},
          {"data", f.data},         {"checkpoint", f.checkpoint},
          {"clips", f.clips},       {"threshold", f.threshold},
          {"activity", f.activity}, {"workers", f.workers}};
}

ExperimentConfig base_config(const Flags& f) {
  return f.config.empty() ? ExperimentConfig{} : load_experiment(f.config);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

// Saves the resolved experiment config and the flags of this invocation.
void save_run(const fs::path& dir, const std::string& verb, const Flags& f, const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  save_experiment(cfg, (dir / "config.json").string());
  json run = {{"verb", verb}, {"flags", flags_json(f)}, {"config", json::parse(to_json(cfg))}};
  write_text(dir / "run.json", run.dump(2) + "\n");
}

struct Split {
  io::Dataset data;
  std::vector<world::Video> train, val;
};

Split load_split(const std::string& manifest) {
  Split s;
  s.data = io::read_dataset(manifest);
  for (auto& v : s.data.videos) {
    (v.index < s.data.world.train_videos ? s.train : s.val).push_back(std::move(v));
  }
  s.data.videos.clear();
  return s;
}

int gen_data(const Flags& f, bool seed_set) {
  auto cfg = base_config(f);
  if (seed_set) cfg.world.seed = f.seed;
  cfg.train.workers = f.workers;
  cfg.world.validate();
  const std::size_t n = cfg.world.train_videos + cfg.world.val_videos;
  io::Dataset data{cfg.world, world::generate(cfg.world, n, 0, f.workers)};
  io::write_dataset(f.out, data);
  save_run(f.out, "gen-data", f, cfg);
  std::printf("wrote %zu videos (%zu train, %zu val) to %s\n", n, cfg.world.train_videos, cfg.world.val_videos,
              (fs::path(f.out) / "manifest.json").c_str());
  return 0;
}

int train_verb(const Flags& f, bool seed_set, bool clips_set) {
  auto cfg = base_config(f);
  auto split = load_split(f.data);
  cfg.world = split.data.world;
  if (seed_set) cfg.train.seed = f.seed;
  if (clips_set) cfg.train.eval_clips = f.clips;
  cfg.train.workers = f.workers;
  cfg.validate();
  save_run(f.out, "train", f, cfg);
  const auto tr = train::prepare(split.train, cfg.model);
  const auto va = train::prepare(split.val, cfg.model);
  train::TrainOptions opts;
  opts.metrics_csv = fs::path(f.out) / "metrics.csv";
  opts.checkpoint = fs::path(f.out) / "best.ornc";
  opts.on_row = [](const train::EpochRow& r) { std::printf("%s\n", train::csv_row(r).c_str()); };
  std::printf("%s\n", train::kMetricsHeader);
  const auto result = train::train(cfg, tr, va, opts);
  io::save_checkpoint(fs::path(f.out) / "last.ornc", {cfg, result.last});
  if (result.best_epoch == 0) io::save_checkpoint(*opts.checkpoint, {cfg, result.best});
  std::printf("best epoch %zu, val %.4f, %zu epochs\n", result.best_epoch, result.best_val, result.epochs_completed);
  return 0;
}

int eval_verb(const Flags& f, bool seed_set) {
  const auto ckpt = io::load_checkpoint(f.checkpoint);
  auto split = load_split(f.data);
  ExperimentConfig cfg = ckpt.config;
  cfg.world = split.data.world;
  cfg.train.workers = f.workers;
  cfg.validate();
  const std::uint64_t eval_seed = seed_set ? f.seed : cfg.train.eval_seed;
  const auto va = train::prepare(split.val.empty() ? split.train : split.val, cfg.model);
  const auto r = train::evaluate(ckpt.params, cfg, va, f.clips, eval_seed);
  std::printf("videos %zu clips %zu loss %.6f top1 %.6f mAP %.6f\n", va.size(), f.clips, r.loss, r.top1, r.mAP);
  if (!f.out.empty()) {
    save_run(f.out, "eval", f, cfg);
    json j = {{"flags", flags_json(f)}, {"eval_seed", eval_seed}, {"videos", va.size()},
              {"loss", r.loss},         {"top1", r.top1},         {"mAP", r.mAP}};
    write_text(fs::path(f.out) / "eval.json", j.dump(2) + "\n");
  }
  return 0;
}

int ablate_verb(const Flags& f, bool seed_set) {
  auto cfg = base_config(f);
  cfg.train.workers = f.workers;
  const std::uint64_t first = seed_set ? f.seed : cfg.train.seed;
  const auto variants = ablation::expand(cfg);
  std::printf("%zu variants x %zu seeds\n", variants.size(), cfg.ablation.seeds);
  save_run(f.out, "ablate", f, cfg);
  std::ofstream csv(fs::path(f.out) / "ablation.csv", std::ios::trunc);
  csv << ablation::csv_header(cfg) << '\n';
  std::printf("%s\n", ablation::csv_header(cfg).c_str());
  ablation::run(cfg, first, [&](const ablation::RunRow& row) {
    const auto line = ablation::csv_row(row);
    csv << line << '\n';
    csv.flush();
    std::printf("%s\n", line.c_str());
  });
  return 0;
}

int export_graph(const Flags& f, bool seed_set) {
  const auto ckpt = io::load_checkpoint(f.checkpoint);
  auto split = load_split(f.data);
  ExperimentConfig cfg = ckpt.config;
  cfg.world = split.data.world;
  cfg.train.workers = f.workers;
  cfg.validate();
  const std::uint64_t eval_seed = seed_set ? f.seed : cfg.train.eval_seed;
  const auto va = train::prepare(split.val.empty() ? split.train : split.val, cfg.model);
  const auto g = graph::export_interaction_graph(ckpt.params, cfg, va, f.activity, f.threshold, eval_seed);
  if (g.clips == 0) std::fprintf(stderr, "warning: no videos of activity %zu; graph is empty\n", f.activity);
  save_run(f.out, "export-graph", f, cfg);
  write_text(fs::path(f.out) / "graph.dot", graph::to_dot(g));
  write_text(fs::path(f.out) / "graph.json", graph::to_adjacency_json(g));
  for (const auto& e : g.edges) {
    std::printf("%zu -> %zu weight %.6f (count %zu)\n", e.from, e.to, e.weight, e.count);
  }
  return 0;
}

int grad_check(const Flags& f, double tolerance, const GradCheckOptions& options) {
  ModelConfig model = f.config.empty() ? diagnostics::micro_model() : load_experiment(f.config).model;
  model.validate();
  const auto clip = diagnostics::micro_clip(model, 2, 2, f.seed);
  const auto r = diagnostics::check_model_gradients(model, clip, f.seed, options);
  std::printf("coordinates %zu (halved %zu, skipped %zu) max_rel_error %.3e at %s[%zu] (analytic %.9e numeric %.9e)\n",
              r.coordinates, r.halved, r.skipped, r.max_rel_error, r.worst_param.c_str(), r.worst_index,
              r.worst_analytic, r.worst_numeric);
  const bool ok = r.max_rel_error <= tolerance;
  std::printf("%s (tolerance %.1e)\n", ok ? "PASS" : "FAIL", tolerance);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object relation network: synthetic data, training, evaluation and analysis"};
  app.require_subcommand(1);
  Flags f;
  double grad_tolerance = 1e-4;
  GradCheckOptions grad_options{1e-3, true};
  int stencil = 5;

  auto config_opt = [&](CLI::App* c) {
    c->add_option("--config", f.config, "Experiment config JSON (missing keys keep defaults)")
        ->check(CLI::ExistingFile)
        ->capture_default_str();
  };
  auto seed_opt = [&](CLI::App* c, const std::string& what) {
    return c->add_option("--seed", f.seed, what)->capture_default_str();
  };
  auto workers_opt = [&](CLI::App* c) {
    c->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset (manifest + shards)");
  config_opt(gen);
  auto* gen_seed = seed_opt(gen, "World seed (overrides world.seed)");
  gen->add_option("--out", f.out, "Output directory")->capture_default_str();
  workers_opt(gen);

  auto* tr = app.add_subcommand("train", "Train a model; writes config, metrics.csv and checkpoints");
  config_opt(tr);
  auto* tr_seed = seed_opt(tr, "Model seed (overrides train.seed)");
  tr->add_option("--data", f.data, "Dataset manifest")->capture_default_str();
  tr->add_option("--out", f.out, "Run directory")->capture_default_str();
  auto* tr_clips = tr->add_option("--clips", f.clips, "Validation clips per video (overrides train.eval_clips)")
                       ->check(CLI::PositiveNumber)
                       ->capture_default_str();
  workers_opt(tr);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the validation split");
  auto* ev_seed = seed_opt(ev, "Evaluation seed (default: the checkpoint's train.eval_seed)");
  ev->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->capture_default_str();
  ev->add_option("--data", f.data, "Dataset manifest")->capture_default_str();
  ev->add_option("--clips", f.clips, "Clips per video")->check(CLI::PositiveNumber)->capture_default_str();
  ev->add_option("--out", f.out, "Directory for eval.json")->capture_default_str();
  workers_opt(ev);

  auto* ab = app.add_subcommand("ablate", "Run the ablation grid of the config over several seeds");
  config_opt(ab);
  auto* ab_seed = seed_opt(ab, "First seed (default: train.seed)");
  ab->add_option("--out", f.out, "Output directory for ablation.csv")->capture_default_str();
  workers_opt(ab);

  auto* eg = app.add_subcommand("export-graph", "Export the interaction graph of one activity class");
  auto* eg_seed = seed_opt(eg, "Evaluation seed (default: the checkpoint's train.eval_seed)");
  eg->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->capture_default_str();
  eg->add_option("--data", f.data, "Dataset manifest")->capture_default_str();
  eg->add_option("--activity", f.activity, "Activity class")->capture_default_str();
  eg->add_option("--threshold", f.threshold, "Drop edges with normalised weight below this")->capture_default_str();
  eg->add_option("--out", f.out, "Output directory for graph.dot and graph.json")->capture_default_str();
  workers_opt(eg);

  auto* gc = app.add_subcommand("grad-check", "Finite-difference check of the full loss on a micro clip");
  gc->add_option("--config", f.config, "Experiment config; its model section is checked (default: micro model)")
      ->check(CLI::ExistingFile);
  seed_opt(gc, "Seed of parameters and clip");
  gc->add_option("--threshold", grad_tolerance, "Maximum relative error")->capture_default_str();
  gc->add_option("--eps", grad_options.eps, "Finite-difference step")->capture_default_str();
  gc->add_option("--stencil", stencil, "Central difference points (3 or 5)")
      ->check(CLI::IsMember({3, 5}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_data(f, gen_seed->count() > 0);
    if (*tr) return train_verb(f, tr_seed->count() > 0, tr_clips->count() > 0);
    if (*ev) return eval_verb(f, ev_seed->count() > 0);
    if (*ab) return ablate_verb(f, ab_seed->count() > 0);
    if (*eg) return export_graph(f, eg_seed->count() > 0);
    if (*gc) {
      grad_options.fourth_order = stencil == 5;
      return grad_check(f, grad_tolerance, grad_options);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
