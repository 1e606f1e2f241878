#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "orn/diagnostics.hpp"
#include "orn/model.hpp"
#include "orn/recognition.hpp"
#include "test_util.hpp"

using namespace orn;

TEST(Probabilities, SoftmaxAndSigmoid) {
  const std::vector<double> logits{1.0, 2.0, 3.0};
  const auto p = recognition::probabilities(logits, false);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-15);
  EXPECT_NEAR(p[2] / p[1], std::exp(1.0), 1e-12);
  const auto s = recognition::probabilities(std::vector<double>{0.0, -800.0, 800.0}, true);
  EXPECT_DOUBLE_EQ(s[0], 0.5);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_EQ(s[2], 1.0);
}

TEST(TotalLoss, UniformLogitsGiveLogClassesPlusAux) {
  ad::Graph<double> g;
  auto logits = g.constant(Tensord({1, 5}, 0.0));
  auto aux = g.constant(Tensord({2, 6}, 1.0));
  Tensord targets({2, 6});
  targets.at({0, 2}) = 1.0;
  targets.at({1, 4}) = 0.7;
  targets.at({1, 1}) = 0.3;
  recognition::ActivityTarget t;
  t.label = 3;
  const auto terms = recognition::total_loss(logits, t, false, aux, targets, false);
  EXPECT_NEAR(terms.activity.item(), std::log(5.0), 1e-12);
  EXPECT_NEAR(terms.aux.item(), 2.0 * std::log(6.0), 1e-12);
  EXPECT_NEAR(terms.total.item(), std::log(5.0) + 2.0 * std::log(6.0), 1e-12);
  recognition::ActivityTarget multi;
  multi.multi_hot = {1, 0, 1, 0, 0};
  const auto bce = recognition::total_loss(logits, multi, true, ad::Var<double>{}, Tensord{}, false);
  EXPECT_NEAR(bce.total.item(), std::log(2.0), 1e-12);
}

TEST(Model, ParameterLayoutPerHeadsMode) {
  auto cfg = diagnostics::micro_model();
  const auto both = init_params<float>(cfg, 1);
  cfg.heads = HeadsMode::activity_only;
  const auto act = init_params<float>(cfg, 1);
  cfg.heads = HeadsMode::object_only;
  const auto obj = init_params<float>(cfg, 1);
  for (std::size_t i = 0; i < act.size(); ++i) {
    EXPECT_FALSE(act.name(i).starts_with("orn.") || act.name(i).starts_with("head.object")) << act.name(i);
  }
  for (std::size_t i = 0; i < obj.size(); ++i) {
    EXPECT_FALSE(obj.name(i).starts_with("context.") || obj.name(i).starts_with("head.activity")) << obj.name(i);
    EXPECT_TRUE(both.contains(obj.name(i)));
  }
  EXPECT_TRUE(both.contains("head.aux.w"));
  EXPECT_TRUE(both.contains("context.f.wz"));
  EXPECT_EQ(init_params<float>(diagnostics::micro_model(), 1), both);
  EXPECT_FALSE(init_params<float>(diagnostics::micro_model(), 2) == both);
}

TEST(Model, ObjectHeadParameterNames) {
  EXPECT_TRUE(is_object_head_param("backbone.shared.0.spatial.w"));
  EXPECT_TRUE(is_object_head_param("orn.h.0.w"));
  EXPECT_TRUE(is_object_head_param("head.aux.b"));
  EXPECT_FALSE(is_object_head_param("backbone.activity.3.spatial.w"));
  EXPECT_FALSE(is_object_head_param("context.f.wz"));
  EXPECT_FALSE(is_object_head_param("head.activity.w"));
}

TEST(Model, TwoHeadLogitsAverageTheHeads) {
  const auto cfg = diagnostics::micro_model();
  const auto params = init_params<double>(cfg, 3);
  const auto clip = diagnostics::micro_clip(cfg, 3, 2, 4);
  ad::Graph<double> g;
  Bindings<double> p(g, params);
  std::mt19937_64 rng(1);
  auto out = forward(p, cfg, clip, rng);
  ASSERT_EQ(out.prediction.logits.shape(), (Shape{1, cfg.num_activities}));
  for (std::size_t i = 0; i < cfg.num_activities; ++i) {
    EXPECT_DOUBLE_EQ(out.prediction.logits.value()[i],
                     0.5 * (out.prediction.y1.value()[i] + out.prediction.y2.value()[i]));
  }
  EXPECT_EQ(out.aux_logits.shape(), (Shape{6, 6}));
  EXPECT_EQ(out.descriptors.frames(), 3u);
  EXPECT_EQ(out.descriptor_classes.size(), 6u);
}

TEST(Model, ForwardRejectsWrongFrameSize) {
  auto cfg = diagnostics::micro_model();
  const auto params = init_params<float>(cfg, 3);
  auto clip = diagnostics::micro_clip(cfg, 2, 1, 4);
  cfg.frame_height = 32;
  cfg.frame_width = 32;
  ad::Graph<float> g;
  Bindings<float> p(g, params);
  std::mt19937_64 rng(1);
  EXPECT_THROW(forward(p, cfg, clip, rng), DimensionError);
}

class ModelGradient : public ::testing::TestWithParam<int> {};

// Full loss of a 2-frame, 2-object micro clip in every structural variant.
TEST_P(ModelGradient, MatchesFiniteDifferences) {
  auto cfg = diagnostics::micro_model();
  switch (GetParam()) {
    case 1: cfg.heads = HeadsMode::activity_only; break;
    case 2: cfg.heads = HeadsMode::object_only; break;
    case 3: cfg.pairing.clique_size = 3; break;
    case 4: cfg.pairing.mode = PairingMode::intra_frame; break;
    case 5: cfg.pairing.mode = PairingMode::pixel_cells; cfg.pairing.pixel_grid = 2; break;
    case 6: cfg.pairing.f_phi_kind = FPhiKind::mlp; cfg.context.aggregation = Aggregation::gap; break;
    case 7: cfg.multi_label = true; cfg.soft_aux_targets = true; break;
    default: break;
  }
  const auto clip = diagnostics::micro_clip(cfg, 2, 2, 10 + GetParam());
  GradCheckOptions opts{1e-3, true};
  opts.max_coords_per_tensor = 24;
  const auto r = diagnostics::check_model_gradients(cfg, clip, 5, opts);
  EXPECT_LE(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index << "]";
  EXPECT_GT(r.coordinates, 100u);
}

INSTANTIATE_TEST_SUITE_P(Variants, ModelGradient, ::testing::Range(0, 8));
