#include "orn/diagnostics.hpp"

#include <random>

namespace orn::diagnostics {

ModelConfig micro_model() {
  ModelConfig cfg;
  cfg.frame_height = 16;
  cfg.frame_width = 16;
  for (auto& b : cfg.backbone.blocks) b.channels_out = 4;
  cfg.descriptors.mask_grid = 4;
  cfg.descriptors.shape_hidden = 6;
  cfg.descriptors.shape_dim = 3;
  cfg.reasoning = {6, 5, 4, 6};
  cfg.context.state_dim = 4;
  cfg.num_activities = 3;
  return cfg;
}

ClipInput micro_clip(const ModelConfig& cfg, std::size_t frames, std::size_t objects, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  const std::size_t h = cfg.frame_height, w = cfg.frame_width;
  ClipInput clip;
  clip.frames = Tensorf({3, frames, h, w});
  for (auto& v : clip.frames.data()) v = unit(rng);
  // Objects sit in vertical strips so masks never overlap.
  const std::size_t strip = w / std::max<std::size_t>(objects, 1);
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<FrameObject> objs;
    for (std::size_t k = 0; k < objects; ++k) {
      InstanceAnnotation a;
      a.instance_index = k;
      a.mask = Mask(h, w);
      const std::size_t c0 = k * strip, r0 = std::uniform_int_distribution<std::size_t>(0, h / 2)(rng);
      const std::size_t rows = 2 + std::uniform_int_distribution<std::size_t>(0, h / 2 - 2)(rng);
      const std::size_t cols = 1 + std::uniform_int_distribution<std::size_t>(0, strip - 1)(rng);
      for (std::size_t r = r0; r < r0 + rows && r < h; ++r) {
        for (std::size_t c = c0; c < c0 + cols; ++c) a.mask.set(r, c);
      }
      std::vector<double> raw(cfg.descriptors.num_object_classes);
      double sum = 0.0;
      for (auto& x : raw) sum += (x = 0.1 + unit(rng));
      for (auto x : raw) a.class_distribution.push_back(static_cast<float>(x / sum));
      objs.push_back(prepare_object(a, cfg));
    }
    clip.objects.push_back(std::move(objs));
  }
  return clip;
}

GradCheckReport check_model_gradients(const ModelConfig& cfg, const ClipInput& clip, std::uint64_t seed,
                                      const GradCheckOptions& options) {
  auto params = init_params<double>(cfg, seed);
  // Zero-initialised biases put ReLU inputs exactly on the kink; move them off.
  std::mt19937_64 rng(mix_seed(seed, 2));
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (auto& v : params.value(i).data()) v += jitter(rng);
  }
  recognition::ActivityTarget target;
  target.label = seed % cfg.num_activities;
  if (cfg.multi_label) {
    target.multi_hot.assign(cfg.num_activities, 0.0f);
    target.multi_hot[target.label] = 1.0f;
  }
  const ScalarFn f = [&](Bindings<double>& p) {
    std::mt19937_64 rng(mix_seed(seed, 1));
    auto fwd = forward(p, cfg, clip, rng);
    return recognition::total_loss(fwd.prediction.logits, target, cfg.multi_label, fwd.aux_logits, fwd.aux_targets,
                                   cfg.soft_aux_targets)
        .total;
  };
  return check_gradients(f, params, options);
}

}  // namespace orn::diagnostics
