#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "orn/config.hpp"
#include "orn/ops.hpp"
#include "orn/params.hpp"

namespace orn {

// Binary mask at frame resolution, row-major.
struct Mask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  Mask() = default;
  Mask(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w, 0) {}

  bool at(std::size_t r, std::size_t c) const { return pixels[r * width + c] != 0; }
  void set(std::size_t r, std::size_t c, bool v = true) { pixels[r * width + c] = v ? 1 : 0; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

// Run lengths over the column-major pixel order, starting with a background
// run (which may be 0).
std::vector<std::uint32_t> rle_encode(const Mask& mask);
// Throws FormatError when the counts do not sum to height * width.
Mask rle_decode(std::span<const std::uint32_t> counts, std::size_t height, std::size_t width);

struct InstanceAnnotation {
  std::vector<float> class_distribution;
  float score = 1.0f;
  Mask mask;
  std::size_t instance_index = 0;

  // argmax of the class distribution, smallest index on ties.
  std::size_t class_id() const;
  // Throws FormatError for an empty mask, a distribution that does not sum
  // to 1 within 1e-5 or a score outside [0,1].
  void validate(std::size_t num_classes) const;
  friend bool operator==(const InstanceAnnotation&, const InstanceAnnotation&) = default;
};

// Flat cells of an out_h x out_w grid that contain foreground after
// max-pooling the mask down to the grid. When that leaves nothing, the single
// cell holding the mask centroid is returned. Throws on an empty mask.
std::vector<std::size_t> mask_cells(const Mask& mask, std::size_t out_h, std::size_t out_w);

// Area-max resize of a mask to a grid x grid map, flattened row-major.
std::vector<float> resize_mask(const Mask& mask, std::size_t grid);

// Appearance pooling of one object: mean of the feature columns of `features`
// [D, H_u, W_u] over mask_cells(mask, H_u, W_u).
template <typename T>
Tensor<T> mask_pool(const Tensor<T>& features, const Mask& mask);

// Indices of at most k annotations, by descending score then smaller
// instance index, returned in ascending instance order.
std::vector<std::size_t> select_topk(std::span<const InstanceAnnotation> annotations, std::size_t k);

// Per-object descriptor o = [b u c] with its parts.
struct ObjectDescriptor {
  std::vector<float> shape;       // b
  std::vector<float> appearance;  // u
  std::vector<float> object_class;  // c
  std::vector<float> o;
  std::size_t frame_index = 0;
  std::size_t instance_index = 0;
};

// Throws DimensionError when the part sizes do not match `cfg`.
ObjectDescriptor assemble(std::span<const float> b, std::span<const float> u, std::span<const float> c,
                          std::size_t shape_dim, std::size_t appearance_dim, std::size_t num_classes);

namespace shape_encoder {

// Perceptron g^2 -> shape_hidden -> shape_dim.
template <typename T>
void add_params(ParamStore<T>& store, const DescriptorConfig& cfg, std::mt19937_64& rng);

// masks [N, g^2] -> embeddings [N, shape_dim].
template <typename T>
ad::Var<T> embed(Bindings<T>& p, const ad::Var<T>& masks);

}  // namespace shape_encoder

// Differentiable assembly of descriptor rows: [N,d_b], [N,d_u], [N,C] ->
// [N, d_b + d_u + C]. Parts disabled in `subset` are replaced by zeros of the
// same width.
template <typename T>
ad::Var<T> assemble_rows(const ad::Var<T>& shape, const ad::Var<T>& appearance, const ad::Var<T>& object_class,
                         const FeatureSubset& subset);

}  // namespace orn
