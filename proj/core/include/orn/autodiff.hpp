#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "orn/tensor.hpp"

namespace orn::ad {

template <typename T>
class Graph;

// One recorded value. `backward` reads `grad` and accumulates into the
// gradients of the node's inputs.
template <typename T>
struct Node {
  Tensor<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::size_t index = 0;
  Graph<T>* graph = nullptr;
  std::function<void(Node&)> backward;

  // Zero-initialised gradient buffer, allocated on first use.
  std::vector<T>& ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T{0});
    return grad;
  }
};

// Lightweight handle to a node owned by a Graph. Copying a Var never copies
// data.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Node<T>* node) : node_(node) {}

  bool valid() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t dim(std::size_t axis) const { return node_->value.dim(axis); }
  bool requires_grad() const { return node_->requires_grad; }
  // Empty when no gradient reached this node.
  std::span<const T> grad() const { return node_->grad; }
  Node<T>* node() const { return node_; }
  Graph<T>& graph() const { return *node_->graph; }

  // Scalar value of a single-element variable.
  T item() const;

 private:
  Node<T>* node_ = nullptr;
};

// Define-by-run tape. Nodes are stored in insertion order, which is a valid
// topological order; backward walks it in exact reverse.
//
// A graph belongs to one thread. Data parallelism uses one graph per batch
// element.
template <typename T>
class Graph {
 public:
  explicit Graph(bool checked = true) : checked_(checked) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value);
  Var<T> variable(Tensor<T> value);

  // Appends an op result. In checked mode a non-finite value throws
  // NumericError naming the op.
  Var<T> record(const char* op, Tensor<T> value, bool requires_grad, std::function<void(Node<T>&)> backward);

  // Seeds d(root)/d(root) = 1 for a single-element root and propagates.
  void backward(const Var<T>& root);

  std::size_t size() const { return nodes_.size(); }
  const Node<T>& node(std::size_t i) const { return *nodes_[i]; }
  bool checked() const { return checked_; }

  void set_trace(bool on) { trace_ = on; }
  // Node indices visited by the last backward, in visit order (trace only).
  const std::vector<std::size_t>& backward_trace() const { return trace_order_; }

 private:
  Var<T> push(std::unique_ptr<Node<T>> node);

  std::vector<std::unique_ptr<Node<T>>> nodes_;
  bool checked_;
  bool trace_ = false;
  std::vector<std::size_t> trace_order_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace orn::ad
