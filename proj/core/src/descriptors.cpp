#include "orn/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orn/nn.hpp"

namespace orn {

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](auto v) { return v != 0; }));
}

std::vector<std::uint32_t> rle_encode(const Mask& mask) {
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint32_t run = 0;
  for (std::size_t c = 0; c < mask.width; ++c) {
    for (std::size_t r = 0; r < mask.height; ++r) {
      const bool v = mask.at(r, c);
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

Mask rle_decode(std::span<const std::uint32_t> counts, std::size_t height, std::size_t width) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total != static_cast<std::uint64_t>(height) * width) {
    throw FormatError("RLE counts sum to " + std::to_string(total) + ", expected " + std::to_string(height * width));
  }
  Mask mask(height, width);
  std::size_t pos = 0;
  bool value = false;
  for (auto run : counts) {
    for (std::uint32_t i = 0; i < run; ++i, ++pos) {
      if (value) mask.set(pos % height, pos / height);
    }
    value = !value;
  }
  return mask;
}

std::size_t InstanceAnnotation::class_id() const {
  return static_cast<std::size_t>(
      std::distance(class_distribution.begin(), std::max_element(class_distribution.begin(), class_distribution.end())));
}

void InstanceAnnotation::validate(std::size_t num_classes) const {
  if (class_distribution.size() != num_classes) {
    throw FormatError("class distribution has " + std::to_string(class_distribution.size()) + " entries, expected " +
                      std::to_string(num_classes));
  }
  double sum = 0.0;
  for (auto p : class_distribution) {
    if (p < 0.0f) throw FormatError("negative class probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-5) throw FormatError("class distribution sums to " + std::to_string(sum));
  if (score < 0.0f || score > 1.0f) throw FormatError("score outside [0,1]");
  if (mask.count() == 0) throw FormatError("annotation mask has no foreground pixels");
}

namespace {

struct Span {
  std::size_t begin, end;
};

// Source range covered by output cell i when n source cells map onto out.
Span area(std::size_t i, std::size_t n, std::size_t out) {
  const std::size_t b = i * n / out;
  const std::size_t e = ((i + 1) * n + out - 1) / out;
  return {b, std::max(e, b + 1)};
}

}  // namespace

std::vector<std::size_t> mask_cells(const Mask& mask, std::size_t out_h, std::size_t out_w) {
  if (mask.count() == 0) throw FormatError("mask_cells: empty mask");
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < out_h; ++i) {
    const Span rs = area(i, mask.height, out_h);
    for (std::size_t j = 0; j < out_w; ++j) {
      const Span cs = area(j, mask.width, out_w);
      bool hit = false;
      for (std::size_t r = rs.begin; r < rs.end && !hit; ++r) {
        for (std::size_t c = cs.begin; c < cs.end && !hit; ++c) hit = mask.at(r, c);
      }
      if (hit) cells.push_back(i * out_w + j);
    }
  }
  if (cells.empty()) {
    double sr = 0.0, sc = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < mask.height; ++r) {
      for (std::size_t c = 0; c < mask.width; ++c) {
        if (mask.at(r, c)) {
          sr += static_cast<double>(r);
          sc += static_cast<double>(c);
          ++n;
        }
      }
    }
    const auto cr = static_cast<std::size_t>(sr / static_cast<double>(n));
    const auto cc = static_cast<std::size_t>(sc / static_cast<double>(n));
    cells.push_back((cr * out_h / mask.height) * out_w + cc * out_w / mask.width);
  }
  return cells;
}

std::vector<float> resize_mask(const Mask& mask, std::size_t grid) {
  std::vector<float> out(grid * grid, 0.0f);
  for (std::size_t i = 0; i < grid; ++i) {
    const Span rs = area(i, mask.height, grid);
    for (std::size_t j = 0; j < grid; ++j) {
      const Span cs = area(j, mask.width, grid);
      bool hit = false;
      for (std::size_t r = rs.begin; r < rs.end && !hit; ++r) {
        for (std::size_t c = cs.begin; c < cs.end && !hit; ++c) hit = mask.at(r, c);
      }
      out[i * grid + j] = hit ? 1.0f : 0.0f;
    }
  }
  return out;
}

template <typename T>
Tensor<T> mask_pool(const Tensor<T>& features, const Mask& mask) {
  if (features.rank() != 3) throw DimensionError("mask_pool expects [D,H,W], got " + to_string(features.shape()));
  const std::size_t d = features.dim(0), h = features.dim(1), w = features.dim(2);
  const auto cells = mask_cells(mask, h, w);
  Tensor<T> u({d});
  for (std::size_t ch = 0; ch < d; ++ch) {
    const T* src = features.data().data() + ch * h * w;
    T mean = src[cells[0]];
    for (std::size_t k = 1; k < cells.size(); ++k) mean += (src[cells[k]] - mean) / static_cast<T>(k + 1);
    u[ch] = mean;
  }
  return u;
}

template Tensor<float> mask_pool<float>(const Tensor<float>&, const Mask&);
template Tensor<double> mask_pool<double>(const Tensor<double>&, const Mask&);

std::vector<std::size_t> select_topk(std::span<const InstanceAnnotation> annotations, std::size_t k) {
  std::vector<std::size_t> order(annotations.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (annotations[a].score != annotations[b].score) return annotations[a].score > annotations[b].score;
    return annotations[a].instance_index < annotations[b].instance_index;
  });
  if (order.size() > k) order.resize(k);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return annotations[a].instance_index < annotations[b].instance_index;
  });
  return order;
}

ObjectDescriptor assemble(std::span<const float> b, std::span<const float> u, std::span<const float> c,
                          std::size_t shape_dim, std::size_t appearance_dim, std::size_t num_classes) {
  if (b.size() != shape_dim || u.size() != appearance_dim || c.size() != num_classes) {
    throw DimensionError("descriptor parts " + std::to_string(b.size()) + "/" + std::to_string(u.size()) + "/" +
                         std::to_string(c.size()) + " do not match " + std::to_string(shape_dim) + "/" +
                         std::to_string(appearance_dim) + "/" + std::to_string(num_classes));
  }
  ObjectDescriptor d;
  d.shape.assign(b.begin(), b.end());
  d.appearance.assign(u.begin(), u.end());
  d.object_class.assign(c.begin(), c.end());
  d.o.reserve(b.size() + u.size() + c.size());
  d.o.insert(d.o.end(), b.begin(), b.end());
  d.o.insert(d.o.end(), u.begin(), u.end());
  d.o.insert(d.o.end(), c.begin(), c.end());
  return d;
}

namespace shape_encoder {

template <typename T>
void add_params(ParamStore<T>& store, const DescriptorConfig& cfg, std::mt19937_64& rng) {
  nn::add_mlp(store, "shape", {cfg.mask_grid * cfg.mask_grid, cfg.shape_hidden, cfg.shape_dim}, rng);
}

template <typename T>
ad::Var<T> embed(Bindings<T>& p, const ad::Var<T>& masks) {
  return nn::mlp(p, "shape", 2, masks, nn::OutputActivation::none);
}

template void add_params<float>(ParamStore<float>&, const DescriptorConfig&, std::mt19937_64&);
template void add_params<double>(ParamStore<double>&, const DescriptorConfig&, std::mt19937_64&);
template ad::Var<float> embed<float>(Bindings<float>&, const ad::Var<float>&);
template ad::Var<double> embed<double>(Bindings<double>&, const ad::Var<double>&);

}  // namespace shape_encoder

template <typename T>
ad::Var<T> assemble_rows(const ad::Var<T>& shape, const ad::Var<T>& appearance, const ad::Var<T>& object_class,
                         const FeatureSubset& subset) {
  auto& g = shape.graph();
  auto keep = [&](const ad::Var<T>& part, bool on) { return on ? part : g.constant(Tensor<T>(part.shape())); };
  std::vector<ad::Var<T>> parts{keep(shape, subset.shape), keep(appearance, subset.appearance),
                                keep(object_class, subset.object_class)};
  return ad::concat(parts, 1);
}

template ad::Var<float> assemble_rows<float>(const ad::Var<float>&, const ad::Var<float>&, const ad::Var<float>&,
                                             const FeatureSubset&);
template ad::Var<double> assemble_rows<double>(const ad::Var<double>&, const ad::Var<double>&,
                                               const ad::Var<double>&, const FeatureSubset&);

}  // namespace orn
