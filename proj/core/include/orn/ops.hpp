#pragma once

#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

#include "orn/autodiff.hpp"

// Differentiable operations. Shapes must match exactly: there is no implicit
// broadcasting, `expand_rows` repeats a vector explicitly. All reductions run
// left to right in index order.
namespace orn::ad {

// [m,k] x [k,n] -> [m,n]
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);
// [m,k] x [n,k]^T -> [m,n]
template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
// a * scale + shift, elementwise.
template <typename T>
Var<T> affine(const Var<T>& a, std::type_identity_t<T> scale, std::type_identity_t<T> shift = T{0});

template <typename T>
Var<T> relu(const Var<T>& a);
template <typename T>
Var<T> sigmoid(const Var<T>& a);
template <typename T>
Var<T> tanh(const Var<T>& a);

// Concatenation along `axis`; all other extents must agree.
template <typename T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis);
template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, std::size_t axis) {
  return concat(std::span<const Var<T>>(parts), axis);
}

// Reductions removing `axis`.
template <typename T>
Var<T> sum_axis(const Var<T>& a, std::size_t axis);
template <typename T>
Var<T> mean_axis(const Var<T>& a, std::size_t axis);
// Sum of every element, shape [1].
template <typename T>
Var<T> sum_all(const Var<T>& a);

// [n] or [1,n] -> [m,n] by repetition.
template <typename T>
Var<T> expand_rows(const Var<T>& a, std::size_t m);
template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape);

// Rows of a 2-D variable, in the given order (repeats allowed).
template <typename T>
Var<T> gather_rows(const Var<T>& a, std::span<const std::size_t> rows);

// out[s] = sum of rows segments[s] of a, accumulated in the listed order.
// Empty segments produce zero rows.
template <typename T>
Var<T> segment_sum_rows(const Var<T>& a, const std::vector<std::vector<std::size_t>>& segments);

struct ConvSpec {
  std::size_t stride = 1;    // spatial stride, both axes
  std::size_t pad_t = 0;     // temporal zero padding per side
  std::size_t pad_s = 0;     // spatial zero padding per side
};

// x [Ci,T,H,W], weight [Co,Ci,kt,k,k], bias [Co] -> [Co,T',H',W'].
// Temporal stride is 1. Throws DimensionError when the kernel does not fit
// the padded input.
template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, const ConvSpec& spec);

// x [C,T,H,W] -> [T,C], mean over the spatial cells of each frame.
template <typename T>
Var<T> spatial_mean(const Var<T>& x);

// A set of spatial cells (flat h*W+w) of one frame.
struct CellSet {
  std::size_t frame = 0;
  std::vector<std::size_t> cells;
};

// x [C,T,H,W] -> [N,C]; row n is the mean feature over sets[n].
template <typename T>
Var<T> pool_cells(const Var<T>& x, std::span<const CellSet> sets);

// Sum over rows of -log softmax(logits[r])[targets[r]]; logits [m,n].
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const std::size_t> targets);

// Sum over rows of -sum_j p[r,j] log softmax(logits[r])[j]; targets [m,n].
template <typename T>
Var<T> soft_cross_entropy(const Var<T>& logits, const Tensor<T>& targets);

// Mean binary cross-entropy of sigmoid(logits) against 0/1 targets.
template <typename T>
Var<T> sigmoid_bce_mean(const Var<T>& logits, std::type_identity_t<std::span<const T>> targets);

}  // namespace orn::ad
