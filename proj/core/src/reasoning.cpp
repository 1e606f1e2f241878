#include "orn/reasoning.hpp"

#include <algorithm>

#include "orn/error.hpp"
#include "orn/nn.hpp"

namespace orn::reasoning {

std::optional<std::size_t> sample_t_prime(std::size_t t, TPrimePolicy policy, std::mt19937_64& rng) {
  if (t <= 1) return std::nullopt;
  if (policy == TPrimePolicy::previous_frame) return t - 1;
  std::uniform_int_distribution<std::size_t> pick(1, t - 1);
  return pick(rng);
}

std::vector<Clique> enumerate_cliques(std::size_t k_past, std::size_t k_current, const PairingConfig& cfg) {
  std::vector<Clique> out;
  if (cfg.mode == PairingMode::intra_frame) {
    for (std::size_t j = 0; j < k_current; ++j) {
      for (std::size_t k = j + 1; k < k_current; ++k) out.push_back({{1, j}, {1, k}});
    }
    return out;
  }
  switch (cfg.clique_size) {
    case 1:
      if (cfg.unary_both_frames) {
        for (std::size_t j = 0; j < k_past; ++j) out.push_back({{0, j}});
      }
      for (std::size_t k = 0; k < k_current; ++k) out.push_back({{1, k}});
      break;
    case 2:
      for (std::size_t j = 0; j < k_past; ++j) {
        for (std::size_t k = 0; k < k_current; ++k) out.push_back({{0, j}, {1, k}});
      }
      break;
    case 3: {
      const std::size_t n = k_past + k_current;
      auto member = [&](std::size_t u) { return u < k_past ? Member{0, u} : Member{1, u - k_past}; };
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          for (std::size_t c = b + 1; c < n; ++c) {
            // a < b < c over the union: mixed iff the first is past and the last current.
            if (a < k_past && c >= k_past) out.push_back({member(a), member(b), member(c)});
          }
        }
      }
      break;
    }
    default:
      throw ConfigError("unsupported clique size " + std::to_string(cfg.clique_size));
  }
  return out;
}

bool needs_past(const PairingConfig& cfg) {
  if (cfg.mode == PairingMode::intra_frame) return false;
  if (cfg.clique_size == 1 && !cfg.unary_both_frames) return false;
  return true;
}

std::size_t relation_input_dim(const ModelConfig& cfg) {
  const std::size_t members = cfg.pairing.mode == PairingMode::intra_frame ? 2 : cfg.pairing.clique_size;
  return members * cfg.descriptor_dim();
}

template <typename T>
void add_params(ParamStore<T>& store, const ModelConfig& cfg, std::mt19937_64& rng) {
  const auto& r = cfg.reasoning;
  nn::add_mlp(store, "orn.h", {relation_input_dim(cfg), r.relation_hidden, r.relation_hidden, r.relation_dim}, rng);
  if (cfg.pairing.f_phi_kind == FPhiKind::recurrent) {
    nn::add_gru(store, "orn.f", r.relation_dim, r.state_dim, rng);
  } else {
    nn::add_mlp(store, "orn.f_mlp", {r.relation_dim, r.mlp_hidden, r.state_dim}, rng);
  }
}

namespace {

// Lexicographic order of the concatenated member rows.
template <typename T>
bool content_less(const Tensor<T>& rows, const CliqueRef& a, const CliqueRef& b) {
  const std::size_t d = rows.dim(1);
  for (std::size_t m = 0; m < a.rows.size(); ++m) {
    const T* x = rows.data().data() + a.rows[m] * d;
    const T* y = rows.data().data() + b.rows[m] * d;
    for (std::size_t j = 0; j < d; ++j) {
      if (x[j] < y[j]) return true;
      if (y[j] < x[j]) return false;
    }
  }
  return false;
}

}  // namespace

template <typename T>
Relations<T> relate_clip(Bindings<T>& p, const ModelConfig& cfg, const ClipDescriptors<T>& d,
                         std::span<const std::optional<std::size_t>> t_primes) {
  const std::size_t steps = d.frames();
  if (t_primes.size() != steps) throw DimensionError("relate_clip: one t' per step required");
  if (d.rows.valid() && d.rows.dim(1) != cfg.descriptor_dim()) {
    throw DimensionError("relate_clip: descriptor width " + std::to_string(d.rows.dim(1)) + ", h_theta expects " +
                         std::to_string(cfg.descriptor_dim()));
  }
  const bool past = needs_past(cfg.pairing);
  Relations<T> out;
  std::vector<std::vector<std::size_t>> segments(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    if (past && !t_primes[t]) continue;
    const std::size_t tp = t_primes[t].value_or(t);
    const auto cliques = enumerate_cliques(past ? d.count(tp) : 0, d.count(t), cfg.pairing);
    std::vector<CliqueRef> refs;
    refs.reserve(cliques.size());
    for (const auto& c : cliques) {
      CliqueRef ref{t, {}};
      for (const auto& m : c) ref.rows.push_back(d.offsets[m.frame == 0 ? tp : t] + m.index);
      refs.push_back(std::move(ref));
    }
    if (cfg.pairing.reduction == ReductionOrder::canonical) {
      std::stable_sort(refs.begin(), refs.end(),
                       [&](const CliqueRef& a, const CliqueRef& b) { return content_less(d.rows.value(), a, b); });
    }
    for (auto& r : refs) {
      segments[t].push_back(out.cliques.size());
      out.cliques.push_back(std::move(r));
    }
  }
  const std::size_t hdim = cfg.reasoning.relation_dim;
  if (out.cliques.empty()) {
    auto& g = p.graph();
    out.g = g.constant(Tensor<T>({steps, hdim}));
    return out;
  }
  const std::size_t members = out.cliques.front().rows.size();
  std::vector<ad::Var<T>> parts;
  for (std::size_t m = 0; m < members; ++m) {
    std::vector<std::size_t> idx;
    idx.reserve(out.cliques.size());
    for (const auto& c : out.cliques) idx.push_back(c.rows[m]);
    parts.push_back(ad::gather_rows(d.rows, std::span<const std::size_t>(idx)));
  }
  auto input = members == 1 ? parts.front() : ad::concat(parts, 1);
  out.activations = nn::mlp(p, "orn.h", 3, input, nn::OutputActivation::relu);
  out.g = ad::segment_sum_rows(out.activations, segments);
  return out;
}

template <typename T>
ad::Var<T> relate(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& past, const ad::Var<T>& current) {
  ClipDescriptors<T> d;
  const std::size_t kp = past.valid() ? past.dim(0) : 0;
  const std::size_t kc = current.valid() ? current.dim(0) : 0;
  d.offsets = {0, kp, kp + kc};
  if (past.valid() && current.valid()) {
    d.rows = ad::concat(std::vector<ad::Var<T>>{past, current}, 0);
  } else {
    d.rows = past.valid() ? past : current;
  }
  const std::vector<std::optional<std::size_t>> tps{std::nullopt, 0};
  auto rel = relate_clip(p, cfg, d, tps);
  const std::size_t row = 1;
  return ad::gather_rows(rel.g, std::span<const std::size_t>(&row, 1));
}

template <typename T>
ad::Var<T> step(Bindings<T>& p, const ModelConfig& cfg, const ad::Var<T>& g, const ad::Var<T>& r_prev) {
  if (cfg.pairing.f_phi_kind == FPhiKind::recurrent) return nn::gru_step(p, "orn.f", g, r_prev);
  return nn::mlp(p, "orn.f_mlp", 2, g, nn::OutputActivation::tanh);
}

template <typename T>
ReasoningOutput<T> run_clip(Bindings<T>& p, const ModelConfig& cfg, const ClipDescriptors<T>& d,
                            std::mt19937_64& rng) {
  const std::size_t steps = d.frames();
  if (steps == 0) throw DimensionError("run_clip: empty clip");
  ReasoningOutput<T> out;
  for (std::size_t t = 1; t <= steps; ++t) {
    auto tp = sample_t_prime(t, cfg.pairing.t_prime_policy, rng);
    out.t_primes.push_back(tp ? std::optional<std::size_t>(*tp - 1) : std::nullopt);
  }
  out.relations = relate_clip(p, cfg, d, std::span<const std::optional<std::size_t>>(out.t_primes));
  auto r = p.graph().constant(Tensor<T>({1, cfg.reasoning.state_dim}));
  for (std::size_t t = 0; t < steps; ++t) {
    auto g_t = ad::gather_rows(out.relations.g, std::span<const std::size_t>(&t, 1));
    r = step(p, cfg, g_t, r);
    out.states.push_back(r);
    out.r = t == 0 ? r : ad::add(out.r, r);
  }
  return out;
}

std::vector<ad::CellSet> pooling_cells(std::size_t h, std::size_t w, std::size_t grid, std::size_t frame) {
  std::vector<ad::CellSet> sets;
  for (std::size_t i = 0; i < grid; ++i) {
    const std::size_t r0 = i * h / grid, r1 = ((i + 1) * h + grid - 1) / grid;
    for (std::size_t j = 0; j < grid; ++j) {
      const std::size_t c0 = j * w / grid, c1 = ((j + 1) * w + grid - 1) / grid;
      ad::CellSet s{frame, {}};
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) s.cells.push_back(r * w + c);
      }
      sets.push_back(std::move(s));
    }
  }
  return sets;
}

template <typename T>
ClipDescriptors<T> pixel_cells(const ModelConfig& cfg, const ad::Var<T>& u) {
  if (u.shape().size() != 4) throw DimensionError("pixel_cells expects [D,T,H,W], got " + to_string(u.shape()));
  const std::size_t grid = cfg.pairing.pixel_grid;
  const std::size_t frames = u.dim(1), h = u.dim(2), w = u.dim(3);
  if (grid > h || grid > w) throw DimensionError("pixel grid larger than the feature map");
  std::vector<ad::CellSet> sets;
  ClipDescriptors<T> d;
  for (std::size_t f = 0; f < frames; ++f) {
    auto s = pooling_cells(h, w, grid, f);
    sets.insert(sets.end(), s.begin(), s.end());
    d.offsets.push_back(sets.size());
  }
  const std::size_t n = sets.size();
  const std::size_t db = cfg.descriptors.shape_dim;
  Tensor<T> pos({n, db});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = i % (grid * grid);
    const T row = (static_cast<T>(cell / grid) + T{0.5}) / static_cast<T>(grid);
    const T col = (static_cast<T>(cell % grid) + T{0.5}) / static_cast<T>(grid);
    if (db > 0) pos[i * db] = row;
    if (db > 1) pos[i * db + 1] = col;
  }
  auto& g = u.graph();
  auto appearance = ad::pool_cells(u, std::span<const ad::CellSet>(sets));
  auto cls = g.constant(Tensor<T>({n, cfg.descriptors.num_object_classes}));
  d.rows = ad::concat(std::vector<ad::Var<T>>{g.constant(std::move(pos)), appearance, cls}, 1);
  return d;
}

#define ORN_INSTANTIATE_REASONING(T)                                                                          \
  template void add_params<T>(ParamStore<T>&, const ModelConfig&, std::mt19937_64&);                        \
  template Relations<T> relate_clip<T>(Bindings<T>&, const ModelConfig&, const ClipDescriptors<T>&,          \
                                       std::span<const std::optional<std::size_t>>);                        \
  template ad::Var<T> relate<T>(Bindings<T>&, const ModelConfig&, const ad::Var<T>&, const ad::Var<T>&);     \
  template ad::Var<T> step<T>(Bindings<T>&, const ModelConfig&, const ad::Var<T>&, const ad::Var<T>&);       \
  template ReasoningOutput<T> run_clip<T>(Bindings<T>&, const ModelConfig&, const ClipDescriptors<T>&,       \
                                          std::mt19937_64&);                                                \
  template ClipDescriptors<T> pixel_cells<T>(const ModelConfig&, const ad::Var<T>&);

ORN_INSTANTIATE_REASONING(float)
ORN_INSTANTIATE_REASONING(double)

}  // namespace orn::reasoning
