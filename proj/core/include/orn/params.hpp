#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "orn/autodiff.hpp"
#include "orn/tensor.hpp"

namespace orn {

// Named parameter tensors in a stable insertion order. Checkpoints, Adam
// state and gradient buffers all follow this order.
template <typename T>
class ParamStore {
 public:
  Tensor<T>& add(const std::string& name, Tensor<T> value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  Tensor<T>& value(std::size_t i) { return entries_[i].second; }
  const Tensor<T>& value(std::size_t i) const { return entries_[i].second; }
  std::size_t index_of(const std::string& name) const;

  std::size_t parameter_count() const;
  // Parameter count over names starting with `prefix`.
  std::size_t parameter_count(const std::string& prefix) const;

  // Same names and shapes, zero values.
  ParamStore zeros_like() const;

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [n, v] : entries_) out.add(n, v.template cast<U>());
    return out;
  }

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

// Parameters bound into one graph. Trainable parameters become leaves that
// collect gradients; the rest become constants. Binding is lazy, so
// parameters unused by a forward pass never enter the graph.
template <typename T>
class Bindings {
 public:
  using Filter = std::function<bool(const std::string&)>;

  Bindings(ad::Graph<T>& graph, const ParamStore<T>& store, Filter trainable = {});

  ad::Var<T> operator()(const std::string& name);
  ad::Graph<T>& graph() { return graph_; }

  // Gradients in store order; parameters not reached are zero.
  ParamStore<T> gradients() const;
  // Adds this graph's gradients into `acc` (same layout as the store).
  void accumulate_into(ParamStore<T>& acc) const;

 private:
  ad::Graph<T>& graph_;
  const ParamStore<T>& store_;
  Filter trainable_;
  std::map<std::string, ad::Var<T>> bound_;
};

extern template class Bindings<float>;
extern template class Bindings<double>;

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
template <typename T>
Tensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

// SplitMix64 finaliser; derives independent stream seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace orn
