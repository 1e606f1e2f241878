#include "orn/autodiff.hpp"

#include <cmath>

namespace orn::ad {

template <typename T>
T Var<T>::item() const {
  if (node_->value.size() != 1) {
    throw DimensionError("item() on non-scalar of shape " + to_string(node_->value.shape()));
  }
  return node_->value[0];
}

template class Var<float>;
template class Var<double>;

template <typename T>
Var<T> Graph<T>::push(std::unique_ptr<Node<T>> node) {
  node->index = nodes_.size();
  node->graph = this;
  nodes_.push_back(std::move(node));
  return Var<T>(nodes_.back().get());
}

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  auto node = std::make_unique<Node<T>>();
  node->value = std::move(value);
  node->op = "constant";
  return push(std::move(node));
}

template <typename T>
Var<T> Graph<T>::variable(Tensor<T> value) {
  auto node = std::make_unique<Node<T>>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->op = "variable";
  return push(std::move(node));
}

template <typename T>
Var<T> Graph<T>::record(const char* op, Tensor<T> value, bool requires_grad,
                        std::function<void(Node<T>&)> backward) {
  if (checked_ && !value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  auto node = std::make_unique<Node<T>>();
  node->value = std::move(value);
  node->op = op;
  node->requires_grad = requires_grad;
  if (requires_grad) node->backward = std::move(backward);
  return push(std::move(node));
}

template <typename T>
void Graph<T>::backward(const Var<T>& root) {
  if (root.size() != 1) {
    throw DimensionError("backward requires a single-element root, got " + to_string(root.shape()));
  }
  if (!root.requires_grad()) return;
  trace_order_.clear();
  root.node()->ensure_grad()[0] += T{1};
  for (std::size_t i = root.node()->index + 1; i-- > 0;) {
    Node<T>& node = *nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (trace_) trace_order_.push_back(i);
    if (checked_) {
      for (auto g : node.grad) {
        if (!std::isfinite(g)) {
          throw NumericError(std::string("non-finite gradient reaching ") + node.op + " (node " +
                             std::to_string(i) + ")");
        }
      }
    }
    if (node.backward) node.backward(node);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace orn::ad
