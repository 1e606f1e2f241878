#include "orn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orn/gemm.hpp"

namespace orn::ad {

namespace {

template <typename T>
Graph<T>& same_graph(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.node()->graph != b.node()->graph) {
    throw Error(std::string(op) + ": operands belong to different graphs");
  }
  return a.graph();
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

void require_rank(const char* op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + to_string(s));
  }
}

template <typename T>
void accumulate(Node<T>* target, const std::vector<T>& g) {
  if (!target->requires_grad) return;
  auto& dst = target->ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

template <typename T, typename F>
Var<T> unary(const char* op, const Var<T>& a, F forward, std::function<void(Node<T>&, Node<T>*)> back) {
  Tensor<T> out(a.shape());
  const auto& x = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(x[i]);
  Node<T>* pa = a.node();
  return a.graph().record(op, std::move(out), a.requires_grad(), [pa, back](Node<T>& self) { back(self, pa); });
}

}  // namespace

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  auto& g = same_graph(a, b, "matmul");
  require_rank("matmul", a.shape(), 2);
  require_rank("matmul", b.shape(), 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) shape_mismatch("matmul", a.shape(), b.shape());
  Tensor<T> out({m, n});
  gemm(false, false, m, n, k, a.value().data().data(), b.value().data().data(), out.data().data(), false);
  Node<T>* pa = a.node();
  Node<T>* pb = b.node();
  return g.record("matmul", std::move(out), a.requires_grad() || b.requires_grad(), [pa, pb, m, n, k](Node<T>& self) {
    if (pa->requires_grad) {
      // dA = dC * B^T
      gemm(false, true, m, k, n, self.grad.data(), pb->value.data().data(), pa->ensure_grad().data(), true);
    }
    if (pb->requires_grad) {
      // dB = A^T * dC
      gemm(true, false, k, n, m, pa->value.data().data(), self.grad.data(), pb->ensure_grad().data(), true);
    }
  });
}

template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  auto& g = same_graph(a, b, "matmul_nt");
  require_rank("matmul_nt", a.shape(), 2);
  require_rank("matmul_nt", b.shape(), 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) shape_mismatch("matmul_nt", a.shape(), b.shape());
  Tensor<T> out({m, n});
  gemm(false, true, m, n, k, a.value().data().data(), b.value().data().data(), out.data().data(), false);
  Node<T>* pa = a.node();
  Node<T>* pb = b.node();
  return g.record("matmul_nt", std::move(out), a.requires_grad() || b.requires_grad(),
                  [pa, pb, m, n, k](Node<T>& self) {
                    if (pa->requires_grad) {
                      // dA = dC * B
                      gemm(false, false, m, k, n, self.grad.data(), pb->value.data().data(),
                           pa->ensure_grad().data(), true);
                    }
                    if (pb->requires_grad) {
                      // dB = dC^T * A
                      gemm(true, false, n, k, m, self.grad.data(), pa->value.data().data(),
                           pb->ensure_grad().data(), true);
                    }
                  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  auto& g = same_graph(a, b, "add");
  if (a.shape() != b.shape()) shape_mismatch("add", a.shape(), b.shape());
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  Node<T>* pa = a.node();
  Node<T>* pb = b.node();
  return g.record("add", std::move(out), a.requires_grad() || b.requires_grad(), [pa, pb](Node<T>& self) {
    accumulate(pa, self.grad);
    accumulate(pb, self.grad);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  auto& g = same_graph(a, b, "sub");
  if (a.shape() != b.shape()) shape_mismatch("sub", a.shape(), b.shape());
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  Node<T>* pa = a.node();
  Node<T>* pb = b.node();
  return g.record("sub", std::move(out), a.requires_grad() || b.requires_grad(), [pa, pb](Node<T>& self) {
    accumulate(pa, self.grad);
    if (pb->requires_grad) {
      auto& d = pb->ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= self.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  auto& g = same_graph(a, b, "mul");
  if (a.shape() != b.shape()) shape_mismatch("mul", a.shape(), b.shape());
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  Node<T>* pa = a.node();
  Node<T>* pb = b.node();
  return g.record("mul", std::move(out), a.requires_grad() || b.requires_grad(), [pa, pb](Node<T>& self) {
    if (pa->requires_grad) {
      auto& d = pa->ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      auto& d = pb->ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * pa->value[i];
    }
  });
}

template <typename T>
Var<T> affine(const Var<T>& a, std::type_identity_t<T> scale, std::type_identity_t<T> shift) {
  return unary<T>(
      "affine", a, [scale, shift](T x) { return x * scale + shift; },
      [scale](Node<T>& self, Node<T>* pa) {
        auto& d = pa->ensure_grad();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * scale;
      });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  return unary<T>(
      "relu", a, [](T x) { return x > T{0} ? x : T{0}; },
      [](Node<T>& self, Node<T>* pa) {
        auto& d = pa->ensure_grad();
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (pa->value[i] > T{0}) d[i] += self.grad[i];
        }
      });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary<T>(
      "sigmoid", a,
      [](T x) {
        if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
        const T e = std::exp(x);
        return e / (T{1} + e);
      },
      [](Node<T>& self, Node<T>* pa) {
        auto& d = pa->ensure_grad();
        for (std::size_t i = 0; i < d.size(); ++i) {
          const T y = self.value[i];
          d[i] += self.grad[i] * y * (T{1} - y);
        }
      });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary<T>(
      "tanh", a, [](T x) { return std::tanh(x); },
      [](Node<T>& self, Node<T>* pa) {
        auto& d = pa->ensure_grad();
        for (std::size_t i = 0; i < d.size(); ++i) {
          const T y = self.value[i];
          d[i] += self.grad[i] * (T{1} - y * y);
        }
      });
}

template <typename T>
Var<T> concat(std::span<const Var<T>> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + to_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  bool needs_grad = false;
  for (const auto& p : parts) {
    same_graph(parts[0], p, "concat");
    const Shape& s = p.shape();
    if (s.size() != first.size()) shape_mismatch("concat", first, s);
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) shape_mismatch("concat", first, s);
    }
    out_shape[axis] += s[axis];
    needs_grad = needs_grad || p.requires_grad();
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];

  Tensor<T> out(out_shape);
  const std::size_t out_stride = out_shape[axis] * inner;
  std::vector<Node<T>*> nodes;
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.shape()[axis] * inner;
    const auto& v = p.value();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.data().data() + o * w, w, out.data().data() + o * out_stride + offset);
    }
    nodes.push_back(p.node());
    widths.push_back(w);
    offset += w;
  }
  return parts[0].graph().record("concat", std::move(out), needs_grad,
                                 [nodes, widths, outer, out_stride](Node<T>& self) {
                                   std::size_t off = 0;
                                   for (std::size_t i = 0; i < nodes.size(); ++i) {
                                     const std::size_t w = widths[i];
                                     if (nodes[i]->requires_grad) {
                                       auto& d = nodes[i]->ensure_grad();
                                       for (std::size_t o = 0; o < outer; ++o) {
                                         const T* src = self.grad.data() + o * out_stride + off;
                                         T* dst = d.data() + o * w;
                                         for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
                                       }
                                     }
                                     off += w;
                                   }
                                 });
}

namespace {

template <typename T>
Var<T> reduce_axis(const char* op, const Var<T>& a, std::size_t axis, bool mean) {
  const Shape& s = a.shape();
  if (axis >= s.size()) throw DimensionError(std::string(op) + ": axis out of range for " + to_string(s));
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const std::size_t n = s[axis];
  Shape out_shape;
  for (std::size_t d = 0; d < s.size(); ++d) {
    if (d != axis) out_shape.push_back(s[d]);
  }
  if (out_shape.empty()) out_shape.push_back(1);
  Tensor<T> out(out_shape);
  const T factor = mean && n > 0 ? T{1} / static_cast<T>(n) : T{1};
  const auto& v = a.value();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      T acc{0};
      for (std::size_t r = 0; r < n; ++r) acc += v[(o * n + r) * inner + i];
      out[o * inner + i] = mean ? acc * factor : acc;
    }
  }
  Node<T>* pa = a.node();
  return a.graph().record(op, std::move(out), a.requires_grad(), [pa, outer, inner, n, factor](Node<T>& self) {
    auto& d = pa->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < inner; ++i) d[(o * n + r) * inner + i] += self.grad[o * inner + i] * factor;
      }
    }
  });
}

}  // namespace

template <typename T>
Var<T> sum_axis(const Var<T>& a, std::size_t axis) {
  return reduce_axis("sum_axis", a, axis, false);
}

template <typename T>
Var<T> mean_axis(const Var<T>& a, std::size_t axis) {
  return reduce_axis("mean_axis", a, axis, true);
}

template <typename T>
Var<T> sum_all(const Var<T>& a) {
  T acc{0};
  for (auto v : a.value().data()) acc += v;
  Node<T>* pa = a.node();
  return a.graph().record("sum_all", Tensor<T>({1}, {acc}), a.requires_grad(), [pa](Node<T>& self) {
    auto& d = pa->ensure_grad();
    for (auto& x : d) x += self.grad[0];
  });
}

template <typename T>
Var<T> expand_rows(const Var<T>& a, std::size_t m) {
  const Shape& s = a.shape();
  if (!(s.size() == 1 || (s.size() == 2 && s[0] == 1))) {
    throw DimensionError("expand_rows: expected [n] or [1,n], got " + to_string(s));
  }
  const std::size_t n = s.back();
  Tensor<T> out({m, n});
  for (std::size_t r = 0; r < m; ++r) std::copy_n(a.value().data().data(), n, out.data().data() + r * n);
  Node<T>* pa = a.node();
  return a.graph().record("expand_rows", std::move(out), a.requires_grad(), [pa, m, n](Node<T>& self) {
    auto& d = pa->ensure_grad();
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < n; ++j) d[j] += self.grad[r * n + j];
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> out = a.value().reshaped(std::move(shape));
  Node<T>* pa = a.node();
  return a.graph().record("reshape", std::move(out), a.requires_grad(),
                          [pa](Node<T>& self) { accumulate(pa, self.grad); });
}

template <typename T>
Var<T> gather_rows(const Var<T>& a, std::span<const std::size_t> rows) {
  require_rank("gather_rows", a.shape(), 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor<T> out({rows.size(), n});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m) {
      throw DimensionError("gather_rows: row " + std::to_string(rows[r]) + " out of range for " +
                           to_string(a.shape()));
    }
    std::copy_n(a.value().data().data() + rows[r] * n, n, out.data().data() + r * n);
  }
  Node<T>* pa = a.node();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.graph().record("gather_rows", std::move(out), a.requires_grad(), [pa, idx, n](Node<T>& self) {
    auto& d = pa->ensure_grad();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      for (std::size_t j = 0; j < n; ++j) d[idx[r] * n + j] += self.grad[r * n + j];
    }
  });
}

template <typename T>
Var<T> segment_sum_rows(const Var<T>& a, const std::vector<std::vector<std::size_t>>& segments) {
  require_rank("segment_sum_rows", a.shape(), 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor<T> out({segments.size(), n});
  for (std::size_t s = 0; s < segments.size(); ++s) {
    T* dst = out.data().data() + s * n;
    for (auto r : segments[s]) {
      if (r >= m) throw DimensionError("segment_sum_rows: row out of range for " + to_string(a.shape()));
      const T* src = a.value().data().data() + r * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  }
  Node<T>* pa = a.node();
  return a.graph().record("segment_sum_rows", std::move(out), a.requires_grad(),
                          [pa, segments, n](Node<T>& self) {
                            auto& d = pa->ensure_grad();
                            for (std::size_t s = 0; s < segments.size(); ++s) {
                              for (auto r : segments[s]) {
                                for (std::size_t j = 0; j < n; ++j) d[r * n + j] += self.grad[s * n + j];
                              }
                            }
                          });
}

namespace {

struct ConvGeometry {
  std::size_t ci, t, h, w;       // input
  std::size_t co, kt, k;         // kernel
  std::size_t to, ho, wo;        // output
  std::size_t stride, pad_t, pad_s;
  std::size_t rows() const { return ci * kt * k * k; }
  std::size_t cols() const { return to * ho * wo; }
};

template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.ci; ++c) {
    for (std::size_t dt = 0; dt < g.kt; ++dt) {
      for (std::size_t dy = 0; dy < g.k; ++dy) {
        for (std::size_t dx = 0; dx < g.k; ++dx) {
          const std::size_t row = ((c * g.kt + dt) * g.k + dy) * g.k + dx;
          T* dst = col + row * ncols;
          for (std::size_t ot = 0; ot < g.to; ++ot) {
            const std::ptrdiff_t it = static_cast<std::ptrdiff_t>(ot + dt) - static_cast<std::ptrdiff_t>(g.pad_t);
            for (std::size_t oy = 0; oy < g.ho; ++oy) {
              const std::ptrdiff_t iy =
                  static_cast<std::ptrdiff_t>(oy * g.stride + dy) - static_cast<std::ptrdiff_t>(g.pad_s);
              T* out_row = dst + (ot * g.ho + oy) * g.wo;
              if (it < 0 || it >= static_cast<std::ptrdiff_t>(g.t) || iy < 0 ||
                  iy >= static_cast<std::ptrdiff_t>(g.h)) {
                std::fill_n(out_row, g.wo, T{0});
                continue;
              }
              const T* src = x + ((c * g.t + static_cast<std::size_t>(it)) * g.h + static_cast<std::size_t>(iy)) * g.w;
              for (std::size_t ox = 0; ox < g.wo; ++ox) {
                const std::ptrdiff_t ix =
                    static_cast<std::ptrdiff_t>(ox * g.stride + dx) - static_cast<std::ptrdiff_t>(g.pad_s);
                out_row[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) ? T{0} : src[ix];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* dx_out) {
  const std::size_t ncols = g.cols();
  for (std::size_t c = 0; c < g.ci; ++c) {
    for (std::size_t dt = 0; dt < g.kt; ++dt) {
      for (std::size_t dy = 0; dy < g.k; ++dy) {
        for (std::size_t dx = 0; dx < g.k; ++dx) {
          const std::size_t row = ((c * g.kt + dt) * g.k + dy) * g.k + dx;
          const T* src = col + row * ncols;
          for (std::size_t ot = 0; ot < g.to; ++ot) {
            const std::ptrdiff_t it = static_cast<std::ptrdiff_t>(ot + dt) - static_cast<std::ptrdiff_t>(g.pad_t);
            if (it < 0 || it >= static_cast<std::ptrdiff_t>(g.t)) continue;
            for (std::size_t oy = 0; oy < g.ho; ++oy) {
              const std::ptrdiff_t iy =
                  static_cast<std::ptrdiff_t>(oy * g.stride + dy) - static_cast<std::ptrdiff_t>(g.pad_s);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
              const T* in_row = src + (ot * g.ho + oy) * g.wo;
              T* dst = dx_out + ((c * g.t + static_cast<std::size_t>(it)) * g.h + static_cast<std::size_t>(iy)) * g.w;
              for (std::size_t ox = 0; ox < g.wo; ++ox) {
                const std::ptrdiff_t ix =
                    static_cast<std::ptrdiff_t>(ox * g.stride + dx) - static_cast<std::ptrdiff_t>(g.pad_s);
                if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w)) dst[ix] += in_row[ox];
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, const ConvSpec& spec) {
  auto& graph = same_graph(x, weight, "conv3d");
  same_graph(x, bias, "conv3d");
  require_rank("conv3d input", x.shape(), 4);
  require_rank("conv3d weight", weight.shape(), 5);
  require_rank("conv3d bias", bias.shape(), 1);
  if (spec.stride == 0) throw ConfigError("conv3d: stride must be positive");
  ConvGeometry g{};
  g.ci = x.dim(0);
  g.t = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.co = weight.dim(0);
  g.kt = weight.dim(2);
  g.k = weight.dim(3);
  g.stride = spec.stride;
  g.pad_t = spec.pad_t;
  g.pad_s = spec.pad_s;
  if (weight.dim(1) != g.ci || weight.dim(4) != g.k) shape_mismatch("conv3d", x.shape(), weight.shape());
  if (bias.dim(0) != g.co) shape_mismatch("conv3d", weight.shape(), bias.shape());
  const std::size_t padded_t = g.t + 2 * g.pad_t, padded_h = g.h + 2 * g.pad_s, padded_w = g.w + 2 * g.pad_s;
  if (g.kt > padded_t || g.k > padded_h || g.k > padded_w) {
    throw DimensionError("conv3d: kernel " + to_string(weight.shape()) + " larger than padded input " +
                         to_string(x.shape()));
  }
  g.to = padded_t - g.kt + 1;
  g.ho = (padded_h - g.k) / g.stride + 1;
  g.wo = (padded_w - g.k) / g.stride + 1;

  auto col = std::make_shared<std::vector<T>>(g.rows() * g.cols());
  im2col(g, x.value().data().data(), col->data());
  Tensor<T> out({g.co, g.to, g.ho, g.wo});
  gemm(false, false, g.co, g.cols(), g.rows(), weight.value().data().data(), col->data(), out.data().data(), false);
  const std::size_t plane = g.cols();
  for (std::size_t c = 0; c < g.co; ++c) {
    const T b = bias.value()[c];
    T* row = out.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) row[i] += b;
  }

  Node<T>* px = x.node();
  Node<T>* pw = weight.node();
  Node<T>* pb = bias.node();
  const bool needs = x.requires_grad() || weight.requires_grad() || bias.requires_grad();
  return graph.record("conv3d", std::move(out), needs, [px, pw, pb, g, col](Node<T>& self) {
    const std::size_t plane = g.cols();
    if (pb->requires_grad) {
      auto& d = pb->ensure_grad();
      for (std::size_t c = 0; c < g.co; ++c) {
        T acc{0};
        const T* row = self.grad.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += row[i];
        d[c] += acc;
      }
    }
    if (pw->requires_grad) {
      gemm(false, true, g.co, g.rows(), plane, self.grad.data(), col->data(), pw->ensure_grad().data(), true);
    }
    if (px->requires_grad) {
      std::vector<T> dcol(g.rows() * plane);
      gemm(true, false, g.rows(), plane, g.co, pw->value.data().data(), self.grad.data(), dcol.data(), false);
      col2im(g, dcol.data(), px->ensure_grad().data());
    }
  });
}

template <typename T>
Var<T> spatial_mean(const Var<T>& x) {
  require_rank("spatial_mean", x.shape(), 4);
  const std::size_t c = x.dim(0), t = x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor<T> out({t, c});
  const T inv = T{1} / static_cast<T>(hw);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t f = 0; f < t; ++f) {
      const T* src = x.value().data().data() + (ch * t + f) * hw;
      T acc{0};
      for (std::size_t i = 0; i < hw; ++i) acc += src[i];
      out[f * c + ch] = acc * inv;
    }
  }
  Node<T>* px = x.node();
  return x.graph().record("spatial_mean", std::move(out), x.requires_grad(), [px, c, t, hw, inv](Node<T>& self) {
    auto& d = px->ensure_grad();
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t f = 0; f < t; ++f) {
        const T g = self.grad[f * c + ch] * inv;
        T* dst = d.data() + (ch * t + f) * hw;
        for (std::size_t i = 0; i < hw; ++i) dst[i] += g;
      }
    }
  });
}

template <typename T>
Var<T> pool_cells(const Var<T>& x, std::span<const CellSet> sets) {
  require_rank("pool_cells", x.shape(), 4);
  const std::size_t c = x.dim(0), t = x.dim(1), hw = x.dim(2) * x.dim(3);
  for (const auto& s : sets) {
    if (s.frame >= t) throw DimensionError("pool_cells: frame out of range for " + to_string(x.shape()));
    if (s.cells.empty()) throw DimensionError("pool_cells: empty cell set");
    for (auto cell : s.cells) {
      if (cell >= hw) throw DimensionError("pool_cells: cell out of range for " + to_string(x.shape()));
    }
  }
  Tensor<T> out({sets.size(), c});
  for (std::size_t n = 0; n < sets.size(); ++n) {
    const auto& s = sets[n];
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* src = x.value().data().data() + (ch * t + s.frame) * hw;
      // Running mean: exact when all cells hold the same value.
      T mean = src[s.cells[0]];
      for (std::size_t k = 1; k < s.cells.size(); ++k) {
        mean += (src[s.cells[k]] - mean) / static_cast<T>(k + 1);
      }
      out[n * c + ch] = mean;
    }
  }
  Node<T>* px = x.node();
  std::vector<CellSet> kept(sets.begin(), sets.end());
  return x.graph().record("pool_cells", std::move(out), x.requires_grad(), [px, kept, c, t, hw](Node<T>& self) {
    auto& d = px->ensure_grad();
    for (std::size_t n = 0; n < kept.size(); ++n) {
      const auto& s = kept[n];
      const T inv = T{1} / static_cast<T>(s.cells.size());
      for (std::size_t ch = 0; ch < c; ++ch) {
        const T g = self.grad[n * c + ch] * inv;
        T* dst = d.data() + (ch * t + s.frame) * hw;
        for (auto cell : s.cells) dst[cell] += g;
      }
    }
  });
}

namespace {

// Row-wise log-softmax of a [m,n] buffer.
template <typename T>
std::vector<T> log_softmax_rows(const Tensor<T>& logits) {
  const std::size_t m = logits.dim(0), n = logits.dim(1);
  std::vector<T> out(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    const T* row = logits.data().data() + r * n;
    T mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T acc{0};
    for (std::size_t j = 0; j < n; ++j) acc += std::exp(row[j] - mx);
    const T lse = mx + std::log(acc);
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = row[j] - lse;
  }
  return out;
}

}  // namespace

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const std::size_t> targets) {
  require_rank("cross_entropy", logits.shape(), 2);
  const std::size_t m = logits.dim(0), n = logits.dim(1);
  if (targets.size() != m) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         to_string(logits.shape()));
  }
  auto logp = log_softmax_rows(logits.value());
  T loss{0};
  for (std::size_t r = 0; r < m; ++r) {
    if (targets[r] >= n) throw DimensionError("cross_entropy: target class out of range");
    loss -= logp[r * n + targets[r]];
  }
  Node<T>* pl = logits.node();
  std::vector<std::size_t> tg(targets.begin(), targets.end());
  return logits.graph().record("cross_entropy", Tensor<T>({1}, {loss}), logits.requires_grad(),
                               [pl, logp = std::move(logp), tg, n](Node<T>& self) {
                                 auto& d = pl->ensure_grad();
                                 const T up = self.grad[0];
                                 for (std::size_t r = 0; r < tg.size(); ++r) {
                                   for (std::size_t j = 0; j < n; ++j) {
                                     const T p = std::exp(logp[r * n + j]);
                                     d[r * n + j] += up * (p - (j == tg[r] ? T{1} : T{0}));
                                   }
                                 }
                               });
}

template <typename T>
Var<T> soft_cross_entropy(const Var<T>& logits, const Tensor<T>& targets) {
  require_rank("soft_cross_entropy", logits.shape(), 2);
  if (targets.shape() != logits.shape()) shape_mismatch("soft_cross_entropy", logits.shape(), targets.shape());
  const std::size_t m = logits.dim(0), n = logits.dim(1);
  auto logp = log_softmax_rows(logits.value());
  T loss{0};
  for (std::size_t i = 0; i < m * n; ++i) loss -= targets[i] * logp[i];
  Node<T>* pl = logits.node();
  return logits.graph().record("soft_cross_entropy", Tensor<T>({1}, {loss}), logits.requires_grad(),
                               [pl, logp = std::move(logp), targets, m, n](Node<T>& self) {
                                 auto& d = pl->ensure_grad();
                                 const T up = self.grad[0];
                                 for (std::size_t r = 0; r < m; ++r) {
                                   T mass{0};
                                   for (std::size_t j = 0; j < n; ++j) mass += targets[r * n + j];
                                   for (std::size_t j = 0; j < n; ++j) {
                                     const T p = std::exp(logp[r * n + j]);
                                     d[r * n + j] += up * (p * mass - targets[r * n + j]);
                                   }
                                 }
                               });
}

template <typename T>
Var<T> sigmoid_bce_mean(const Var<T>& logits, std::type_identity_t<std::span<const T>> targets) {
  const std::size_t n = logits.size();
  if (targets.size() != n) {
    throw DimensionError("sigmoid_bce_mean: " + std::to_string(targets.size()) + " targets for logits " +
                         to_string(logits.shape()));
  }
  T loss{0};
  const auto& x = logits.value();
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    loss += std::max(v, T{0}) - v * targets[i] + std::log1p(std::exp(-std::abs(v)));
  }
  loss /= static_cast<T>(n);
  Node<T>* pl = logits.node();
  std::vector<T> tg(targets.begin(), targets.end());
  return logits.graph().record("sigmoid_bce_mean", Tensor<T>({1}, {loss}), logits.requires_grad(),
                               [pl, tg, n](Node<T>& self) {
                                 auto& d = pl->ensure_grad();
                                 const T up = self.grad[0] / static_cast<T>(n);
                                 for (std::size_t i = 0; i < n; ++i) {
                                   const T v = pl->value[i];
                                   const T s = v >= T{0} ? T{1} / (T{1} + std::exp(-v))
                                                         : std::exp(v) / (T{1} + std::exp(v));
                                   d[i] += up * (s - tg[i]);
                                 }
                               });
}

#define ORN_INSTANTIATE_OPS(T)                                                                          \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                                \
  template Var<T> matmul_nt(const Var<T>&, const Var<T>&);                                             \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                   \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                                   \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                                   \
  template Var<T> affine(const Var<T>&, std::type_identity_t<T>, std::type_identity_t<T>);                                                         \
  template Var<T> relu(const Var<T>&);                                                                 \
  template Var<T> sigmoid(const Var<T>&);                                                              \
  template Var<T> tanh(const Var<T>&);                                                                 \
  template Var<T> concat(std::span<const Var<T>>, std::size_t);                                        \
  template Var<T> sum_axis(const Var<T>&, std::size_t);                                                \
  template Var<T> mean_axis(const Var<T>&, std::size_t);                                               \
  template Var<T> sum_all(const Var<T>&);                                                              \
  template Var<T> expand_rows(const Var<T>&, std::size_t);                                             \
  template Var<T> reshape(const Var<T>&, Shape);                                                       \
  template Var<T> gather_rows(const Var<T>&, std::span<const std::size_t>);                            \
  template Var<T> segment_sum_rows(const Var<T>&, const std::vector<std::vector<std::size_t>>&);       \
  template Var<T> conv3d(const Var<T>&, const Var<T>&, const Var<T>&, const ConvSpec&);                \
  template Var<T> spatial_mean(const Var<T>&);                                                         \
  template Var<T> pool_cells(const Var<T>&, std::span<const CellSet>);                                 \
  template Var<T> cross_entropy(const Var<T>&, std::span<const std::size_t>);                          \
  template Var<T> soft_cross_entropy(const Var<T>&, const Tensor<T>&);                                 \
  template Var<T> sigmoid_bce_mean(const Var<T>&, std::type_identity_t<std::span<const T>>);

ORN_INSTANTIATE_OPS(float)
ORN_INSTANTIATE_OPS(double)

#undef ORN_INSTANTIATE_OPS

}  // namespace orn::ad
