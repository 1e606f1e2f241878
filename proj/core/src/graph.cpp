#include "orn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "orn/error.hpp"

namespace orn::graph {

namespace {

std::string class_name(std::size_t id) {
  static const char* names[] = {"square", "disc", "triangle", "bar", "cross", "ring"};
  return id < 6 ? names[id] : "class" + std::to_string(id);
}

bool edge_order(const Edge& a, const Edge& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return std::make_pair(a.from, a.to) < std::make_pair(b.from, b.to);
}

}  // namespace

void EdgeAccumulator::add(std::size_t from, std::size_t to, double l1) {
  auto& e = edges_[{from, to}];
  e.from = from;
  e.to = to;
  e.total += l1;
  ++e.count;
}

InteractionGraph EdgeAccumulator::finish(std::size_t activity, double threshold) const {
  InteractionGraph g;
  g.activity = activity;
  g.threshold = threshold;
  g.clips = clips_;
  for (const auto& [key, e] : edges_) {
    Edge out = e;
    out.weight = e.total / static_cast<double>(e.count);
    g.all.push_back(out);
  }
  std::sort(g.all.begin(), g.all.end(), edge_order);
  for (const auto& e : g.all) {
    if (e.weight >= threshold) g.edges.push_back(e);
  }
  return g;
}

InteractionGraph export_interaction_graph(const ParamStore<float>& params, const ExperimentConfig& cfg,
                                          std::span<const train::PreparedVideo> videos, std::size_t activity,
                                          double threshold, std::uint64_t eval_seed) {
  if (cfg.model.pairing.mode != PairingMode::inter_frame || cfg.model.pairing.clique_size != 2 ||
      cfg.model.heads == HeadsMode::activity_only) {
    throw ConfigError("interaction graphs need an object head with inter-frame pairs of size 2");
  }
  if (activity >= cfg.model.num_activities) throw ConfigError("activity class out of range");
  EdgeAccumulator acc;
  const Bindings<float>::Filter frozen = [](const std::string&) { return false; };
  for (const auto& v : videos) {
    const auto& label = v.video->label;
    const bool member =
        cfg.model.multi_label ? label.multi_hot.at(activity) > 0.5f : label.label == activity;
    if (!member) continue;
    auto rng = train::eval_rng(eval_seed, v.video->index, 0);
    const auto frames = train::sample_clip(v.video->frames, cfg.train.clip_length, rng);
    ad::Graph<float> graph(true);
    Bindings<float> p(graph, params, frozen);
    auto fwd = forward(p, cfg.model, train::make_clip(v, frames), rng);
    acc.add_clip();
    const auto& rel = fwd.reasoning.relations;
    if (!rel.activations.valid()) continue;
    const std::size_t h = rel.activations.dim(1);
    const auto act = rel.activations.value().data();
    for (std::size_t i = 0; i < rel.cliques.size(); ++i) {
      double l1 = 0.0;
      for (std::size_t k = 0; k < h; ++k) l1 += std::abs(static_cast<double>(act[i * h + k]));
      const auto& rows = rel.cliques[i].rows;
      acc.add(fwd.descriptor_classes.at(rows[0]), fwd.descriptor_classes.at(rows[1]), l1);
    }
  }
  return acc.finish(activity, threshold);
}

std::string to_dot(const InteractionGraph& g) {
  std::string out = "digraph activity_" + std::to_string(g.activity) + " {\n";
  out += "  // clips: " + std::to_string(g.clips) + ", threshold: " + std::to_string(g.threshold) + "\n";
  std::vector<std::size_t> nodes;
  for (const auto& e : g.edges) {
    nodes.push_back(e.from);
    nodes.push_back(e.to);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (auto n : nodes) out += "  c" + std::to_string(n) + " [label=\"" + class_name(n) + "\"];\n";
  for (const auto& e : g.edges) {
    char w[32];
    std::snprintf(w, sizeof(w), "%.6g", e.weight);
    out += "  c" + std::to_string(e.from) + " -> c" + std::to_string(e.to) + " [label=\"" + w + "\", weight=" + w +
           "];\n";
  }
  out += "}\n";
  return out;
}

std::string to_adjacency_json(const InteractionGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"from_name", class_name(e.from)},
                     {"to_name", class_name(e.to)},
                     {"weight", e.weight},
                     {"total", e.total},
                     {"count", e.count}});
  }
  nlohmann::json j = {{"activity", g.activity}, {"threshold", g.threshold}, {"clips", g.clips}, {"edges", edges}};
  return j.dump(2) + "\n";
}

}  // namespace orn::graph
