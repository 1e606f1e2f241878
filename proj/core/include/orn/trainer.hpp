#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "orn/config.hpp"
#include "orn/model.hpp"
#include "orn/params.hpp"
#include "orn/world.hpp"

namespace orn::train {

// 0-based frame indices of a clip: the video is cut into L contiguous
// sub-sequences [floor(i*T/L), floor((i+1)*T/L)) and one frame is drawn
// uniformly from each. An empty sub-sequence (T < L) repeats the last frame of
// its predecessor. Throws ConfigError for L = 0 or T = 0.
std::vector<std::size_t> sample_clip(std::size_t frames, std::size_t length, std::mt19937_64& rng);

// Generator of evaluation clip `clip` of video `index`.
std::mt19937_64 eval_rng(std::uint64_t eval_seed, std::uint64_t index, std::size_t clip);

// A video with its detections converted for the model once.
struct PreparedVideo {
  const world::Video* video = nullptr;
  std::vector<std::vector<FrameObject>> objects;  // per video frame, top-k kept
};

std::vector<PreparedVideo> prepare(std::span<const world::Video> videos, const ModelConfig& cfg);
ClipInput make_clip(const PreparedVideo& v, std::span<const std::size_t> frames);
recognition::ActivityTarget target_of(const world::Video& v, bool multi_label);

// Adam with bias correction, one moment pair per parameter tensor.
class Adam {
 public:
  Adam(const ParamStore<float>& params, const OptimizerConfig& cfg);
  // Updates the tensors accepted by `trainable` (all when empty).
  void step(ParamStore<float>& params, const ParamStore<float>& grads,
            const std::function<bool(const std::string&)>& trainable = {});
  std::uint64_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

// Rank-based average precision: mean over positives of the precision at each
// positive's rank. Ties keep input order. 0 without positives.
double average_precision(std::span<const double> scores, std::span<const int> labels);

struct EvalResult {
  double loss = 0.0;
  double top1 = 0.0;
  double mAP = 0.0;
  std::vector<std::vector<double>> probabilities;  // per video, averaged over clips
};

// Averages the final probabilities of n_clips clips per video. Clip c of a
// video draws frames and t' from eval_rng(eval_seed, index, c). Single-label
// top-1 compares the argmax with the label; multi-label top-1 counts videos
// whose highest-scoring class is positive. mAP averages per-class AP over
// classes with at least one positive.
EvalResult evaluate(const ParamStore<float>& params, const ExperimentConfig& cfg,
                    std::span<const PreparedVideo> videos, std::size_t n_clips, std::uint64_t eval_seed);

struct EpochRow {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double top1 = 0.0;
  double mAP = 0.0;
  double wall_s = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,split,loss,top1,mAP,wall_s";
std::string csv_row(const EpochRow& row);

struct TrainOptions {
  std::optional<std::filesystem::path> metrics_csv;
  std::optional<std::filesystem::path> checkpoint;  // best-val checkpoint
  std::function<void(const EpochRow&)> on_row;
};

struct TrainResult {
  ParamStore<float> initial;
  ParamStore<float> best;
  ParamStore<float> last;
  std::size_t epochs_completed = 0;
  std::size_t best_epoch = 0;
  double best_val = -1.0;
  std::vector<EpochRow> rows;
};

// Adam training with per-epoch train and val rows, early stopping on val top-1
// (mAP when multi-label) and best-val retention. The first phase1_epochs
// epochs only update object-head parameters. A non-finite value aborts with a
// NumericError naming the epoch and step.
TrainResult train(const ExperimentConfig& cfg, std::span<const PreparedVideo> train_set,
                  std::span<const PreparedVideo> val_set, const TrainOptions& options = {});

}  // namespace orn::train
