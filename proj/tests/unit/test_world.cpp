#include <gtest/gtest.h>

#include <cmath>

#include "orn/world.hpp"

using namespace orn;
using world::Event;
using world::EventKind;

namespace {

WorldConfig task_config(TaskKind task) {
  WorldConfig cfg;
  cfg.task = task;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

class EveryTask : public ::testing::TestWithParam<TaskKind> {};

TEST_P(EveryTask, DeterministicAndIndependentOfWorkers) {
  const auto cfg = task_config(GetParam());
  const auto a = world::generate(cfg, 12, 0, 1);
  const auto b = world::generate(cfg, 12, 0, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(world::generate_video(cfg, 7), a[7]);
  auto other = cfg;
  other.seed = 18;
  EXPECT_FALSE(world::generate_video(other, 7) == a[7]);
}

TEST_P(EveryTask, OracleAgreesMasksDisjointAndNonEmpty) {
  const auto cfg = task_config(GetParam());
  for (const auto& v : world::generate(cfg, 1000)) {
    EXPECT_EQ(world::oracle_label(cfg, v.events), v.label) << v.index;
    EXPECT_TRUE(world::masks_disjoint(v)) << v.index;
    for (const auto& frame : v.annotations) {
      for (const auto& a : frame) {
        EXPECT_GE(a.mask.count(), 1u);
        EXPECT_NO_THROW(a.validate(world::kArchetypes));
      }
    }
  }
}

TEST_P(EveryTask, DoubleReversalIsIdentity) {
  const auto cfg = task_config(GetParam());
  for (const auto& v : world::generate(cfg, 50)) {
    const auto r = world::time_reverse(v, cfg);
    EXPECT_EQ(world::oracle_label(cfg, r.events), r.label);
    EXPECT_EQ(world::time_reverse(r, cfg), v);
  }
}

INSTANTIATE_TEST_SUITE_P(Tasks, EveryTask,
                         ::testing::Values(TaskKind::ordered_swap, TaskKind::touch, TaskKind::state_change,
                                           TaskKind::appear_disappear));

TEST(OrderedSwap, OracleAgreesOnTenThousandVideos) {
  auto cfg = task_config(TaskKind::ordered_swap);
  cfg.distractors = 1;
  std::size_t agree = 0;
  const auto videos = world::generate(cfg, 10000);
  for (const auto& v : videos) agree += world::oracle_label(cfg, v.events) == v.label;
  EXPECT_EQ(agree, videos.size());
}

TEST(OrderedSwap, OracleDefinition) {
  const auto cfg = task_config(TaskKind::ordered_swap);
  const std::size_t a = cfg.object_classes[0], b = cfg.object_classes[1];
  const std::vector<Event> a_acts{{EventKind::contact, 2, a, b}, {EventKind::swap, 4, a, b}};
  EXPECT_EQ(world::oracle_label(cfg, a_acts).label, 0u);
  const std::vector<Event> b_acts{{EventKind::swap, 4, b, a}};
  EXPECT_EQ(world::oracle_label(cfg, b_acts).label, 1u);
  EXPECT_EQ(world::mirror_label(0), 1u);
  EXPECT_EQ(world::mirror_label(1), 0u);
}

TEST(OrderedSwap, ReversalMapsToTheMirrorLabel) {
  const auto cfg = task_config(TaskKind::ordered_swap);
  for (const auto& v : world::generate(cfg, 200)) {
    EXPECT_EQ(world::time_reverse(v, cfg).label.label, world::mirror_label(v.label.label));
  }
}

TEST(OrderedSwap, FrameHistogramsMatchAcrossLabels) {
  const auto cfg = task_config(TaskKind::ordered_swap);
  const auto videos = world::generate(cfg, 1000);
  const auto h0 = world::class_pixel_histogram(videos, 0), h1 = world::class_pixel_histogram(videos, 1);
  for (std::size_t c = 0; c < world::kArchetypes; ++c) {
    const double scale = std::max(h0[c], h1[c]);
    if (scale == 0.0) continue;
    EXPECT_LT(std::abs(h0[c] - h1[c]) / scale, 0.01) << c;
  }
}

TEST(OrderedSwap, HistogramsInvariantUnderReversal) {
  const auto cfg = task_config(TaskKind::ordered_swap);
  const auto videos = world::generate(cfg, 1000);
  std::vector<world::Video> reversed;
  for (const auto& v : videos) reversed.push_back(world::time_reverse(v, cfg));
  for (std::size_t label : {0u, 1u}) {
    const auto h = world::class_pixel_histogram(videos, label);
    const auto r = world::class_pixel_histogram(reversed, label);
    for (std::size_t c = 0; c < world::kArchetypes; ++c) {
      const double scale = std::max(h[c], r[c]);
      if (scale > 0.0) EXPECT_LT(std::abs(h[c] - r[c]) / scale, 0.01) << label << " " << c;
    }
  }
}

TEST(OrderedSwap, InstanceIndicesFollowClassRoles) {
  const auto cfg = task_config(TaskKind::ordered_swap);
  for (const auto& v : world::generate(cfg, 100)) {
    for (const auto& frame : v.annotations) {
      for (const auto& a : frame) {
        if (a.instance_index < 2) EXPECT_EQ(a.class_id(), cfg.object_classes[a.instance_index]);
      }
    }
  }
}

TEST(Touch, EmptyLogGivesAllZeroLabel) {
  const auto cfg = task_config(TaskKind::touch);
  const auto label = world::oracle_label(cfg, {});
  EXPECT_EQ(label.multi_hot, std::vector<float>(cfg.object_classes.size(), 0.0f));
}

TEST(StateChange, TargetColorFlipsAfterContact) {
  const auto cfg = task_config(TaskKind::state_change);
  const auto v = world::generate_video(cfg, 3);
  ASSERT_EQ(v.events.size(), 2u);
  EXPECT_EQ(v.events[1].kind, EventKind::flip);
  EXPECT_EQ(v.events[1].frame, v.events[0].frame + 1);
  const auto plain = world::archetype_color(v.events[1].actor, false);
  const auto flipped = world::archetype_color(v.events[1].actor, true);
  EXPECT_NE(plain, flipped);
}

TEST(World, InfeasiblePlacementNamesTheSeed) {
  auto cfg = task_config(TaskKind::appear_disappear);
  cfg.object_size = 30;
  try {
    world::generate_video(cfg, 0);
    FAIL() << "expected GenerationError";
  } catch (const GenerationError& e) {
    EXPECT_NE(std::string(e.what()).find("seed 17"), std::string::npos) << e.what();
  }
}

TEST(World, RejectsSmallFramesAndDuplicateClasses) {
  auto cfg = task_config(TaskKind::ordered_swap);
  cfg.height = 24;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = task_config(TaskKind::ordered_swap);
  cfg.object_classes = {1, 1, 2};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(World, NoisyDetectorDropsAnnotationsButKeepsPixels) {
  auto cfg = task_config(TaskKind::appear_disappear);
  const auto clean = world::generate(cfg, 40);
  cfg.drop_probability = 0.3;
  cfg.jitter_masks = true;
  const auto noisy = world::generate(cfg, 40);
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(clean[i].pixels, noisy[i].pixels);
    EXPECT_TRUE(world::masks_disjoint(noisy[i]));
    for (const auto& f : clean[i].annotations) a += f.size();
    for (const auto& f : noisy[i].annotations) b += f.size();
  }
  EXPECT_LT(b, a);
  EXPECT_GT(b, a / 2);
}

TEST(World, ArchetypesAreDistinctShapes) {
  for (std::size_t i = 0; i < world::kArchetypes; ++i) {
    for (std::size_t j = i + 1; j < world::kArchetypes; ++j) {
      EXPECT_NE(world::archetype_mask(i, 6), world::archetype_mask(j, 6)) << i << " " << j;
    }
  }
}
