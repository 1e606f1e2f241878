#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orn/config.hpp"
#include "orn/trainer.hpp"

namespace orn::graph {

struct Edge {
  std::size_t from = 0;  // object class in frame t'
  std::size_t to = 0;    // object class in frame t
  double total = 0.0;    // summed L1 norm of h_theta over the pairs
  std::size_t count = 0;  // pairs seen (co-occurrences)
  double weight = 0.0;   // total / count
};

struct InteractionGraph {
  std::size_t activity = 0;
  double threshold = 0.0;
  std::size_t clips = 0;
  std::vector<Edge> edges;  // kept edges, by descending weight then (from, to)
  std::vector<Edge> all;    // every edge before thresholding, same order
};

// Sums relation activations per (class(j) -> class(k)) edge.
class EdgeAccumulator {
 public:
  void add(std::size_t from, std::size_t to, double l1);
  void add_clip() { ++clips_; }
  InteractionGraph finish(std::size_t activity, double threshold) const;

 private:
  std::map<std::pair<std::size_t, std::size_t>, Edge> edges_;
  std::size_t clips_ = 0;
};

// One evaluation clip (eval_rng clip 0) per video of class `activity`; each
// inter-frame pair adds ||h_theta(o_j, o_k)||_1 to its class edge. Requires
// inter_frame pairing with clique size 2 (ConfigError otherwise). A class
// without videos yields an empty graph with clips == 0.
InteractionGraph export_interaction_graph(const ParamStore<float>& params, const ExperimentConfig& cfg,
                                          std::span<const train::PreparedVideo> videos, std::size_t activity,
                                          double threshold, std::uint64_t eval_seed);

std::string to_dot(const InteractionGraph& g);
// JSON adjacency listing with raw and normalised weights.
std::string to_adjacency_json(const InteractionGraph& g);

}  // namespace orn::graph
