#include "orn/model.hpp"

#include "orn/backbone.hpp"
#include "orn/error.hpp"

namespace orn {

FrameObject prepare_object(const InstanceAnnotation& a, const ModelConfig& cfg) {
  const std::size_t stride = cfg.backbone.object_stride();
  FrameObject o;
  o.class_distribution = a.class_distribution;
  o.mask_grid = resize_mask(a.mask, cfg.descriptors.mask_grid);
  o.cells = mask_cells(a.mask, a.mask.height / stride, a.mask.width / stride);
  o.instance_index = a.instance_index;
  o.class_id = a.class_id();
  return o;
}

template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamStore<T> store;
  std::mt19937_64 rng(seed);
  backbone::add_params(store, cfg.backbone, rng);
  if (recognition::has_object_head(cfg)) {
    shape_encoder::add_params(store, cfg.descriptors, rng);
    reasoning::add_params(store, cfg, rng);
  }
  if (recognition::has_activity_head(cfg)) context::add_params(store, cfg, rng);
  recognition::add_params(store, cfg, rng);
  return store;
}

template <typename T>
ObjectRows<T> object_descriptors(Bindings<T>& p, const ModelConfig& cfg, const ClipInput& clip,
                                 const ad::Var<T>& u) {
  auto& g = p.graph();
  const std::size_t c = cfg.descriptors.num_object_classes;
  const std::size_t g2 = cfg.descriptors.mask_grid * cfg.descriptors.mask_grid;
  ObjectRows<T> out;
  std::vector<ad::CellSet> sets;
  std::vector<T> masks, classes;
  for (std::size_t f = 0; f < clip.objects.size(); ++f) {
    for (const auto& o : clip.objects[f]) {
      if (o.class_distribution.size() != c) {
        throw DimensionError("object class distribution has " + std::to_string(o.class_distribution.size()) +
                             " entries, model expects " + std::to_string(c));
      }
      if (o.mask_grid.size() != g2) throw DimensionError("object mask grid does not match the model");
      sets.push_back({f, o.cells});
      masks.insert(masks.end(), o.mask_grid.begin(), o.mask_grid.end());
      classes.insert(classes.end(), o.class_distribution.begin(), o.class_distribution.end());
      out.classes.push_back(o.class_id);
    }
    out.descriptors.offsets.push_back(sets.size());
  }
  const std::size_t n = sets.size();
  if (n == 0) return out;
  out.appearance = ad::pool_cells(u, std::span<const ad::CellSet>(sets));
  auto shape = shape_encoder::embed(p, g.constant(Tensor<T>({n, g2}, std::move(masks))));
  out.class_targets = Tensor<T>({n, c}, std::move(classes));
  out.descriptors.rows =
      assemble_rows(shape, out.appearance, g.constant(out.class_targets), cfg.descriptors.features);
  return out;
}

template <typename T>
ForwardResult<T> forward(Bindings<T>& p, const ModelConfig& cfg, const ClipInput& clip, std::mt19937_64& rng) {
  const auto& fs = clip.frames.shape();
  if (fs.size() != 4 || fs[0] != cfg.backbone.in_channels || fs[2] != cfg.frame_height || fs[3] != cfg.frame_width) {
    throw DimensionError("clip frames " + to_string(fs) + " do not match the model input");
  }
  if (clip.objects.size() != fs[1]) throw DimensionError("one object list per clip frame required");
  auto& g = p.graph();
  auto x = g.constant(clip.frames.cast<T>());
  ForwardResult<T> out;
  ad::Var<T> u, v;
  if (cfg.heads == HeadsMode::two_heads) {
    auto maps = backbone::forward(p, cfg.backbone, x);
    u = maps.object;
    v = maps.activity;
  } else if (cfg.heads == HeadsMode::activity_only) {
    v = backbone::forward_activity(p, cfg.backbone, x);
  } else {
    u = backbone::forward_object(p, cfg.backbone, x);
  }
  ad::Var<T> r, h;
  if (u.valid()) {
    auto objects = object_descriptors(p, cfg, clip, u);
    if (objects.appearance.valid()) {
      out.aux_logits = recognition::classify_objects(p, objects.appearance);
      out.aux_targets = objects.class_targets;
    }
    if (cfg.pairing.mode == PairingMode::pixel_cells) {
      out.descriptors = reasoning::pixel_cells(cfg, u);
    } else {
      out.descriptors = std::move(objects.descriptors);
      out.descriptor_classes = std::move(objects.classes);
    }
    out.reasoning = reasoning::run_clip(p, cfg, out.descriptors, rng);
    r = out.reasoning.r;
  }
  if (v.valid()) {
    out.context = context::run_context(p, cfg, context::gap(v));
    h = out.context.h;
  }
  out.prediction = recognition::predict(p, cfg, h, r);
  return out;
}

bool is_object_head_param(const std::string& name) {
  for (const char* prefix : {"backbone.shared.", "backbone.object.", "shape.", "orn.", "head.object.", "head.aux."}) {
    if (name.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

#define ORN_INSTANTIATE_MODEL(T)                                                                            \
  template ParamStore<T> init_params<T>(const ModelConfig&, std::uint64_t);                               \
  template ObjectRows<T> object_descriptors<T>(Bindings<T>&, const ModelConfig&, const ClipInput&,        \
                                               const ad::Var<T>&);                                        \
  template ForwardResult<T> forward<T>(Bindings<T>&, const ModelConfig&, const ClipInput&, std::mt19937_64&);

ORN_INSTANTIATE_MODEL(float)
ORN_INSTANTIATE_MODEL(double)

}  // namespace orn
