#include "orn/recognition.hpp"

#include <algorithm>
#include <cmath>

#include "orn/context.hpp"
#include "orn/error.hpp"
#include "orn/nn.hpp"

namespace orn::recognition {

bool has_activity_head(const ModelConfig& cfg) { return cfg.heads != HeadsMode::object_only; }
bool has_object_head(const ModelConfig& cfg) { return cfg.heads != HeadsMode::activity_only; }

template <typename T>
void add_params(ParamStore<T>& store, const ModelConfig& cfg, std::mt19937_64& rng) {
  if (has_activity_head(cfg)) {
    nn::add_linear(store, "head.activity", context::output_dim(cfg), cfg.num_activities, rng);
  }
  if (has_object_head(cfg)) {
    nn::add_linear(store, "head.object", cfg.reasoning.state_dim, cfg.num_activities, rng);
    nn::add_linear(store, "head.aux", cfg.backbone.object_channels(), cfg.descriptors.num_object_classes, rng);
  }
}

template <typename T>
Prediction<T> predict(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& h, const ad::Var<T>& r) {
  Prediction<T> out;
  if (has_activity_head(cfg)) {
    if (!h.valid()) throw DimensionError("predict: activity head needs the context summary");
    out.y1 = nn::linear(p, "head.activity", h);
  }
  if (has_object_head(cfg)) {
    if (!r.valid()) throw DimensionError("predict: object head needs the reasoning state");
    out.y2 = nn::linear(p, "head.object", r);
  }
  if (out.y1.valid() && out.y2.valid()) {
    out.logits = ad::affine(ad::add(out.y1, out.y2), T{0.5});
  } else {
    out.logits = out.y1.valid() ? out.y1 : out.y2;
  }
  return out;
}

template <typename T>
ad::Var<T> classify_objects(Bindings<T>& p, const ad::Var<T>& u) {
  return nn::linear(p, "head.aux", u);
}

std::vector<double> probabilities(std::span<const double> logits, bool multi_label) {
  std::vector<double> out(logits.size());
  if (multi_label) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double x = logits[i];
      out[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return out;
  }
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

template <typename T>
LossTerms<T> total_loss(const ad::Var<T>& logits, const ActivityTarget& target, bool multi_label,
                        const ad::Var<T>& aux_logits, const Tensor<T>& aux_targets, bool soft_targets) {
  LossTerms<T> out;
  if (multi_label) {
    if (target.multi_hot.size() != logits.size()) {
      throw DimensionError("multi-label target has " + std::to_string(target.multi_hot.size()) + " entries for " +
                           std::to_string(logits.size()) + " classes");
    }
    std::vector<T> t(target.multi_hot.begin(), target.multi_hot.end());
    out.activity = ad::sigmoid_bce_mean(logits, std::span<const T>(t));
  } else {
    if (target.label >= logits.size()) throw DimensionError("activity label out of range");
    out.activity = ad::cross_entropy(logits, std::span<const std::size_t>(&target.label, 1));
  }
  out.total = out.activity;
  if (aux_logits.valid() && aux_logits.dim(0) > 0) {
    if (aux_targets.shape() != aux_logits.shape()) {
      throw DimensionError("aux targets " + to_string(aux_targets.shape()) + " do not match logits " +
                           to_string(aux_logits.shape()));
    }
    if (soft_targets) {
      out.aux = ad::soft_cross_entropy(aux_logits, aux_targets);
    } else {
      const std::size_t n = aux_targets.dim(0), c = aux_targets.dim(1);
      std::vector<std::size_t> hard(n);
      for (std::size_t i = 0; i < n; ++i) {
        const T* row = aux_targets.data().data() + i * c;
        hard[i] = static_cast<std::size_t>(std::max_element(row, row + c) - row);
      }
      out.aux = ad::cross_entropy(aux_logits, std::span<const std::size_t>(hard));
    }
    out.total = ad::add(out.activity, out.aux);
  }
  return out;
}

#define ORN_INSTANTIATE_RECOGNITION(T)                                                                    \
  template void add_params<T>(ParamStore<T>&, const ModelConfig&, std::mt19937_64&);                    \
  template Prediction<T> predict<T>(Bindings<T>&, const ModelConfig&, const ad::Var<T>&, const ad::Var<T>&); \
  template ad::Var<T> classify_objects<T>(Bindings<T>&, const ad::Var<T>&);                             \
  template LossTerms<T> total_loss<T>(const ad::Var<T>&, const ActivityTarget&, bool, const ad::Var<T>&, \
                                      const Tensor<T>&, bool);

ORN_INSTANTIATE_RECOGNITION(float)
ORN_INSTANTIATE_RECOGNITION(double)

}  // namespace orn::recognition
