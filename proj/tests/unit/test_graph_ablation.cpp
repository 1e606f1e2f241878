#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "orn/ablation.hpp"
#include "orn/backbone.hpp"
#include "orn/graph.hpp"
#include "orn/model.hpp"

using namespace orn;

TEST(EdgeAccumulator, WeightIsMeanActivation) {
  graph::EdgeAccumulator acc;
  acc.add(0, 1, 2.0);
  acc.add(0, 1, 4.0);
  acc.add(1, 0, 1.0);
  acc.add(2, 2, 5.0);
  acc.add_clip();
  const auto g = acc.finish(0, 2.0);
  ASSERT_EQ(g.all.size(), 3u);
  EXPECT_EQ(g.all[0].from, 2u);
  EXPECT_DOUBLE_EQ(g.all[1].weight, 3.0);
  EXPECT_EQ(g.all[1].count, 2u);
  EXPECT_DOUBLE_EQ(g.all[2].weight, 1.0);
  EXPECT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.clips, 1u);
}

TEST(EdgeAccumulator, ScalingKeepsRankingAndAbsentPairsHaveNoEdge) {
  graph::EdgeAccumulator a, b;
  const double values[][3] = {{0, 1, 0.3}, {1, 0, 0.7}, {0, 1, 0.9}, {3, 4, 0.2}, {1, 0, 0.1}};
  for (const auto& v : values) {
    a.add(static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), v[2]);
    b.add(static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]), 2.0 * v[2]);
  }
  const auto ga = a.finish(0, 0.0), gb = b.finish(0, 0.0);
  ASSERT_EQ(ga.all.size(), gb.all.size());
  for (std::size_t i = 0; i < ga.all.size(); ++i) {
    EXPECT_EQ(ga.all[i].from, gb.all[i].from);
    EXPECT_EQ(ga.all[i].to, gb.all[i].to);
    EXPECT_DOUBLE_EQ(2.0 * ga.all[i].weight, gb.all[i].weight);
  }
  for (const auto& e : ga.all) EXPECT_FALSE(e.from == 4 && e.to == 3);
}

TEST(InteractionGraph, EdgesOnlyBetweenCoOccurringClasses) {
  auto cfg = fixture::small_experiment();
  const auto videos = world::generate(cfg.world, 10);
  const auto prepared = train::prepare(videos, cfg.model);
  const auto params = init_params<float>(cfg.model, 2);
  const auto g = graph::export_interaction_graph(params, cfg, prepared, 0, 0.0, 7);
  EXPECT_GT(g.clips, 0u);
  ASSERT_FALSE(g.all.empty());
  const std::set<std::size_t> present(cfg.world.object_classes.begin(), cfg.world.object_classes.begin() + 2);
  for (const auto& e : g.all) {
    EXPECT_TRUE(present.count(e.from) && present.count(e.to)) << e.from << "->" << e.to;
    EXPECT_GE(e.weight, 0.0);
  }
  const auto dot = graph::to_dot(g);
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(graph::to_adjacency_json(g).find("\"edges\""), std::string::npos);
  EXPECT_THROW(graph::export_interaction_graph(params, cfg, prepared, 5, 0.0, 7), ConfigError);
  auto intra = cfg;
  intra.model.pairing.mode = PairingMode::intra_frame;
  EXPECT_THROW(graph::export_interaction_graph(params, intra, prepared, 0, 0.0, 7), ConfigError);
}

TEST(Ablation, ExpandCrossProduct) {
  auto cfg = fixture::small_experiment();
  const auto variants = ablation::expand(cfg);
  ASSERT_EQ(variants.size(), 3u);
  EXPECT_EQ(variants[0].name, "clique_size=1");
  EXPECT_EQ(variants[2].config.model.pairing.clique_size, 3u);
  cfg.ablation.axes = {{"f_phi", {"recurrent", "mlp"}}, {"heads", {"two_heads", "activity_only"}}};
  const auto grid = ablation::expand(cfg);
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_EQ(grid[0].name, "f_phi=recurrent;heads=two_heads");
  EXPECT_EQ(grid[3].config.model.heads, HeadsMode::activity_only);
  EXPECT_EQ(grid[3].config.model.pairing.f_phi_kind, FPhiKind::mlp);
}

TEST(Ablation, InflationGridHasFourteenDistinctRows) {
  auto cfg = fixture::small_experiment();
  const auto rows = backbone::inflation_grid();
  ASSERT_EQ(rows.size(), 14u);
  std::vector<std::pair<BackboneConfig, Aggregation>> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto v = cfg;
    ablation::apply_setting(v, "inflation", std::to_string(i));
    EXPECT_EQ(v.model.backbone.blocks.size(), 5u);
    EXPECT_NO_THROW(v.validate());
    const auto key = std::make_pair(v.model.backbone, v.model.context.aggregation);
    for (const auto& s : seen) EXPECT_FALSE(s == key) << i;
    seen.push_back(key);
  }
}

TEST(Ablation, SettingsAndErrors) {
  auto cfg = fixture::small_experiment();
  ablation::apply_setting(cfg, "features", "shape+class");
  EXPECT_TRUE(cfg.model.descriptors.features.shape);
  EXPECT_FALSE(cfg.model.descriptors.features.appearance);
  EXPECT_TRUE(cfg.model.descriptors.features.object_class);
  ablation::apply_setting(cfg, "pairing_mode", "pixel_cells");
  EXPECT_EQ(cfg.model.pairing.mode, PairingMode::pixel_cells);
  ablation::apply_setting(cfg, "aggregation", "gap");
  EXPECT_EQ(cfg.model.context.aggregation, Aggregation::gap);
  EXPECT_THROW(ablation::apply_setting(cfg, "depth", "3"), ConfigError);
  EXPECT_THROW(ablation::apply_setting(cfg, "f_phi", "lstm"), ConfigError);
  EXPECT_THROW(ablation::apply_setting(cfg, "inflation", "14"), ConfigError);
  EXPECT_THROW(ablation::apply_setting(cfg, "features", "shape+colour"), ConfigError);
  EXPECT_THROW(ablation::apply_setting(cfg, "clique_size", "x"), ConfigError);
}

TEST(Ablation, CsvLayout) {
  const auto cfg = fixture::small_experiment();
  EXPECT_EQ(ablation::csv_header(cfg), "variant,seed,clique_size,top1,mAP,best_epoch,epochs");
  ablation::RunRow row{"clique_size=2", {{"clique_size", "2"}}, 3, 0.5, 0.25, 2, 4};
  EXPECT_EQ(ablation::csv_row(row), "\"clique_size=2\",3,2,0.500000,0.250000,2,4");
}
