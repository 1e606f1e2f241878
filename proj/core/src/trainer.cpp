#include "orn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "orn/error.hpp"
#include "orn/io.hpp"

namespace orn::train {

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown in index order.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool top1_hit(std::span<const double> probs, const world::Video& v, bool multi_label) {
  const std::size_t k = argmax(probs);
  return multi_label ? v.label.multi_hot.at(k) > 0.5f : k == v.label.label;
}

double mean_ap(const std::vector<std::vector<double>>& probs, std::span<const PreparedVideo> videos, bool multi_label) {
  if (probs.empty()) return 0.0;
  const std::size_t classes = probs.front().size();
  double sum = 0.0;
  std::size_t counted = 0;
  std::vector<double> scores(probs.size());
  std::vector<int> labels(probs.size());
  for (std::size_t c = 0; c < classes; ++c) {
    int positives = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      scores[i] = probs[i][c];
      const auto& v = *videos[i].video;
      labels[i] = multi_label ? (v.label.multi_hot.at(c) > 0.5f ? 1 : 0) : (v.label.label == c ? 1 : 0);
      positives += labels[i];
    }
    if (positives == 0) continue;
    sum += average_precision(scores, labels);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

struct ClipOutcome {
  double loss = 0.0;
  std::vector<double> probs;
};

// Forward (and optionally backward) of one clip.
ClipOutcome run_clip(const ParamStore<float>& params, const ExperimentConfig& cfg, const PreparedVideo& v,
                     std::span<const std::size_t> frames, std::mt19937_64& rng,
                     const Bindings<float>::Filter& trainable, ParamStore<float>* grads) {
  ad::Graph<float> graph(true);
  Bindings<float> p(graph, params, trainable);
  const auto clip = make_clip(v, frames);
  auto fwd = forward(p, cfg.model, clip, rng);
  const bool multi = cfg.model.multi_label;
  auto loss = recognition::total_loss(fwd.prediction.logits, target_of(*v.video, multi), multi, fwd.aux_logits,
                                      fwd.aux_targets, cfg.model.soft_aux_targets);
  ClipOutcome out;
  out.loss = loss.total.item();
  const auto logits = fwd.prediction.logits.value().data();
  const std::vector<double> lg(logits.begin(), logits.end());
  out.probs = recognition::probabilities(lg, multi);
  if (grads != nullptr) {
    graph.backward(loss.total);
    *grads = p.gradients();
  }
  return out;
}

}  // namespace

std::vector<std::size_t> sample_clip(std::size_t frames, std::size_t length, std::mt19937_64& rng) {
  if (length == 0) throw ConfigError("clip length must be positive");
  if (frames == 0) throw ConfigError("cannot sample a clip from an empty video");
  std::vector<std::size_t> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t lo = i * frames / length, hi = (i + 1) * frames / length;
    if (hi > lo) {
      out.push_back(std::uniform_int_distribution<std::size_t>(lo, hi - 1)(rng));
    } else {
      out.push_back(lo == 0 ? 0 : lo - 1);
    }
  }
  return out;
}

std::mt19937_64 eval_rng(std::uint64_t eval_seed, std::uint64_t index, std::size_t clip) {
  return std::mt19937_64(mix_seed(mix_seed(eval_seed, index), clip));
}

std::vector<PreparedVideo> prepare(std::span<const world::Video> videos, const ModelConfig& cfg) {
  std::vector<PreparedVideo> out;
  out.reserve(videos.size());
  for (const auto& v : videos) {
    if (v.height != cfg.frame_height || v.width != cfg.frame_width) {
      throw DimensionError("video " + std::to_string(v.index) + " is " + std::to_string(v.height) + "x" +
                           std::to_string(v.width) + ", model expects " + std::to_string(cfg.frame_height) + "x" +
                           std::to_string(cfg.frame_width));
    }
    PreparedVideo p;
    p.video = &v;
    for (const auto& frame : v.annotations) {
      std::vector<FrameObject> objs;
      for (auto i : select_topk(frame, cfg.descriptors.max_objects)) {
        frame[i].validate(cfg.descriptors.num_object_classes);
        objs.push_back(prepare_object(frame[i], cfg));
      }
      p.objects.push_back(std::move(objs));
    }
    out.push_back(std::move(p));
  }
  return out;
}

ClipInput make_clip(const PreparedVideo& v, std::span<const std::size_t> frames) {
  const auto& video = *v.video;
  const std::size_t l = frames.size(), plane = video.height * video.width;
  ClipInput clip;
  clip.frames = Tensorf({3, l, video.height, video.width});
  auto dst = clip.frames.data();
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < l; ++i) {
      const auto* src = video.pixels.data() + (c * video.frames + frames[i]) * plane;
      float* out = dst.data() + (c * l + i) * plane;
      for (std::size_t k = 0; k < plane; ++k) out[k] = static_cast<float>(src[k]) / 255.0f;
    }
  }
  for (auto f : frames) clip.objects.push_back(v.objects.at(f));
  return clip;
}

recognition::ActivityTarget target_of(const world::Video& v, bool multi_label) {
  recognition::ActivityTarget t;
  if (multi_label) {
    t.multi_hot = v.label.multi_hot;
  } else {
    t.label = v.label.label;
  }
  return t;
}

Adam::Adam(const ParamStore<float>& params, const OptimizerConfig& cfg) : cfg_(cfg) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.value(i).size(), 0.0);
    v_.emplace_back(params.value(i).size(), 0.0);
  }
}

void Adam::step(ParamStore<float>& params, const ParamStore<float>& grads,
                const std::function<bool(const std::string&)>& trainable) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (trainable && !trainable(params.name(i))) continue;
    auto p = params.value(i).data();
    const auto g = grads.value(i).data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gk;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gk * gk;
      const double update = cfg_.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.eps);
      p[k] = static_cast<float>(static_cast<double>(p[k]) - update);
    }
  }
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

EvalResult evaluate(const ParamStore<float>& params, const ExperimentConfig& cfg,
                    std::span<const PreparedVideo> videos, std::size_t n_clips, std::uint64_t eval_seed) {
  if (n_clips == 0) throw ConfigError("evaluation needs at least one clip per video");
  const bool multi = cfg.model.multi_label;
  std::vector<std::vector<double>> probs(videos.size());
  std::vector<double> losses(videos.size(), 0.0);
  const Bindings<float>::Filter frozen = [](const std::string&) { return false; };
  parallel_for(videos.size(), cfg.train.workers, [&](std::size_t i) {
    const auto& v = videos[i];
    for (std::size_t c = 0; c < n_clips; ++c) {
      auto rng = eval_rng(eval_seed, v.video->index, c);
      const auto frames = sample_clip(v.video->frames, cfg.train.clip_length, rng);
      auto out = run_clip(params, cfg, v, frames, rng, frozen, nullptr);
      losses[i] += out.loss;
      if (probs[i].empty()) probs[i].assign(out.probs.size(), 0.0);
      for (std::size_t k = 0; k < out.probs.size(); ++k) probs[i][k] += out.probs[k];
    }
    for (auto& p : probs[i]) p /= static_cast<double>(n_clips);
  });
  EvalResult r;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    r.loss += losses[i];
    if (top1_hit(probs[i], *videos[i].video, multi)) ++hits;
  }
  if (!videos.empty()) {
    r.loss /= static_cast<double>(videos.size() * n_clips);
    r.top1 = static_cast<double>(hits) / static_cast<double>(videos.size());
  }
  r.mAP = mean_ap(probs, videos, multi);
  r.probabilities = std::move(probs);
  return r;
}

std::string csv_row(const EpochRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%zu,%s,%.6f,%.6f,%.6f,%.3f", row.epoch, row.split.c_str(), row.loss, row.top1,
                row.mAP, row.wall_s);
  return buf;
}

TrainResult train(const ExperimentConfig& cfg, std::span<const PreparedVideo> train_set,
                  std::span<const PreparedVideo> val_set, const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("empty training set");
  const bool multi = cfg.model.multi_label;
  TrainResult result;
  ParamStore<float> params = init_params<float>(cfg.model, cfg.train.seed);
  result.initial = params;
  result.best = params;
  Adam adam(params, cfg.optimizer);
  std::ofstream csv;
  if (options.metrics_csv) {
    csv.open(*options.metrics_csv, std::ios::trunc);
    if (!csv) throw FormatError("cannot write " + options.metrics_csv->string());
    csv << kMetricsHeader << '\n';
  }
  const auto start = std::chrono::steady_clock::now();
  auto wall = [&] {
    if (!cfg.train.log_wall_time) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto emit = [&](EpochRow row) {
    row.wall_s = wall();
    if (csv.is_open()) {
      csv << csv_row(row) << '\n';
      csv.flush();
      if (!csv) throw FormatError("metrics write failed");
    }
    if (options.on_row) options.on_row(row);
    result.rows.push_back(std::move(row));
  };

  const Bindings<float>::Filter object_phase = [](const std::string& n) { return is_object_head_param(n); };
  std::size_t since_best = 0;
  std::size_t step_index = 0;
  const std::size_t batch = cfg.train.batch_size;
  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const bool phase1 = epoch <= cfg.train.phase1_epochs;
    const Bindings<float>::Filter trainable = phase1 ? object_phase : Bindings<float>::Filter{};
    const std::uint64_t epoch_seed = mix_seed(cfg.train.seed, epoch);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    std::vector<std::vector<double>> train_probs(train_set.size());
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += batch, ++step_index) {
      const std::size_t n = std::min(batch, order.size() - b0);
      std::vector<ParamStore<float>> grads(n);
      std::vector<ClipOutcome> outcomes(n);
      try {
        parallel_for(n, cfg.train.workers, [&](std::size_t e) {
          const auto& v = train_set[order[b0 + e]];
          std::mt19937_64 rng(mix_seed(epoch_seed, v.video->index));
          const auto frames = sample_clip(v.video->frames, cfg.train.clip_length, rng);
          outcomes[e] = run_clip(params, cfg, v, frames, rng, trainable, &grads[e]);
          if (!std::isfinite(outcomes[e].loss)) throw NumericError("loss is not finite");
        });
      } catch (const NumericError& err) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step_index) + ": " + err.what());
      }
      ParamStore<float> acc = params.zeros_like();
      for (std::size_t e = 0; e < n; ++e) {
        for (std::size_t i = 0; i < acc.size(); ++i) {
          auto dst = acc.value(i).data();
          const auto src = grads[e].value(i).data();
          for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        }
        loss_sum += outcomes[e].loss;
        const auto& v = *train_set[order[b0 + e]].video;
        if (top1_hit(outcomes[e].probs, v, multi)) ++hits;
        train_probs[order[b0 + e]] = std::move(outcomes[e].probs);
      }
      const float inv = 1.0f / static_cast<float>(n);
      for (std::size_t i = 0; i < acc.size(); ++i) {
        for (auto& g : acc.value(i).data()) g *= inv;
      }
      adam.step(params, acc, trainable);
    }
    const double count = static_cast<double>(train_set.size());
    emit({epoch, "train", loss_sum / count, static_cast<double>(hits) / count,
          mean_ap(train_probs, train_set, multi), 0.0});

    const auto val_data = val_set.empty() ? train_set : val_set;
    const auto val = evaluate(params, cfg, val_data, cfg.train.eval_clips, cfg.train.eval_seed);
    emit({epoch, "val", val.loss, val.top1, val.mAP, 0.0});
    result.epochs_completed = epoch;
    result.last = params;

    const double metric = multi ? val.mAP : val.top1;
    if (metric > result.best_val) {
      result.best_val = metric;
      result.best_epoch = epoch;
      result.best = params;
      since_best = 0;
      if (options.checkpoint) io::save_checkpoint(*options.checkpoint, {cfg, params});
    } else if (++since_best >= cfg.train.patience) {
      break;
    }
  }
  return result;
}

}  // namespace orn::train
