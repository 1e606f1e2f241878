#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "orn/config.hpp"
#include "orn/ops.hpp"
#include "orn/params.hpp"

namespace orn::recognition {

bool has_activity_head(const ModelConfig& cfg);
bool has_object_head(const ModelConfig& cfg);

// `head.activity` (A x context dim), `head.object` (A x d_r) and the auxiliary
// object classifier `head.aux` (C x D_u), as far as the heads mode needs them.
template <typename T>
void add_params(ParamStore<T>& store, const ModelConfig& cfg, std::mt19937_64& rng);

template <typename T>
struct Prediction {
  ad::Var<T> y1;      // activity head logits [1, A]
  ad::Var<T> y2;      // object head logits [1, A]
  ad::Var<T> logits;  // (y1 + y2) / 2, or the single available head
};

// h [1, context dim] and r [1, d_r]; either may be unset when its head is off.
template <typename T>
Prediction<T> predict(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& h, const ad::Var<T>& r);

// u [N, D_u] -> object class logits [N, C].
template <typename T>
ad::Var<T> classify_objects(Bindings<T>& p, const ad::Var<T>& u);

// Final class scores from logits: softmax, or elementwise sigmoid when
// multi_label.
std::vector<double> probabilities(std::span<const double> logits, bool multi_label);

struct ActivityTarget {
  std::size_t label = 0;          // single-label mode
  std::vector<float> multi_hot;   // multi-label mode
};

template <typename T>
struct LossTerms {
  ad::Var<T> total;     // [1]
  ad::Var<T> activity;  // [1]
  ad::Var<T> aux;       // [1], unset without objects
};

// CE(softmax(logits), label) (mean sigmoid BCE when multi_label) plus the sum
// over objects of CE(softmax(aux_logits[n]), target[n]). Targets are the
// argmax of each row of `aux_targets` [N, C], or the full rows when
// soft_targets is set.
template <typename T>
LossTerms<T> total_loss(const ad::Var<T>& logits, const ActivityTarget& target, bool multi_label,
                        const ad::Var<T>& aux_logits, const Tensor<T>& aux_targets, bool soft_targets);

}  // namespace orn::recognition
