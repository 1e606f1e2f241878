#include "orn/params.hpp"

#include <cmath>

namespace orn {

template <typename T>
Tensor<T>& ParamStore<T>::add(const std::string& name, Tensor<T> value) {
  if (contains(name)) throw ConfigError("duplicate parameter " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

template <typename T>
std::size_t ParamStore<T>::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter " + name);
  return it->second;
}

template <typename T>
Tensor<T>& ParamStore<T>::at(const std::string& name) {
  return entries_[index_of(name)].second;
}

template <typename T>
const Tensor<T>& ParamStore<T>::at(const std::string& name) const {
  return entries_[index_of(name)].second;
}

template <typename T>
std::size_t ParamStore<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

template <typename T>
std::size_t ParamStore<T>::parameter_count(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.first.rfind(prefix, 0) == 0) n += e.second.size();
  }
  return n;
}

template <typename T>
ParamStore<T> ParamStore<T>::zeros_like() const {
  ParamStore out;
  for (const auto& [n, v] : entries_) out.add(n, Tensor<T>(v.shape()));
  return out;
}

template class ParamStore<float>;
template class ParamStore<double>;

template <typename T>
Bindings<T>::Bindings(ad::Graph<T>& graph, const ParamStore<T>& store, Filter trainable)
    : graph_(graph), store_(store), trainable_(std::move(trainable)) {}

template <typename T>
ad::Var<T> Bindings<T>::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  const Tensor<T>& value = store_.at(name);
  const bool train = !trainable_ || trainable_(name);
  ad::Var<T> v = train ? graph_.variable(value) : graph_.constant(value);
  bound_.emplace(name, v);
  return v;
}

template <typename T>
ParamStore<T> Bindings<T>::gradients() const {
  ParamStore<T> out = store_.zeros_like();
  accumulate_into(out);
  return out;
}

template <typename T>
void Bindings<T>::accumulate_into(ParamStore<T>& acc) const {
  for (const auto& [name, var] : bound_) {
    auto g = var.grad();
    if (g.empty()) continue;
    auto& dst = acc.at(name);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
}

template class Bindings<float>;
template class Bindings<double>;

template <typename T>
Tensor<T> glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<T> out(std::move(shape));
  for (auto& v : out.data()) v = static_cast<T>(dist(rng));
  return out;
}

template Tensor<float> glorot_uniform<float>(Shape, std::size_t, std::size_t, std::mt19937_64&);
template Tensor<double> glorot_uniform<double>(Shape, std::size_t, std::size_t, std::mt19937_64&);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace orn
