#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "json.hpp"
#include "orn/config.hpp"

using namespace orn;
using nlohmann::json;

TEST(Config, JsonRoundTrip) {
  auto cfg = fixture::small_experiment(TaskKind::touch);
  cfg.model.pairing.f_phi_kind = FPhiKind::mlp;
  cfg.model.backbone.blocks[1].inflation = Inflation::k3D;
  cfg.model.descriptors.features.appearance = false;
  cfg.ablation.axes = {{"heads", {"two_heads", "object_only"}}};
  EXPECT_EQ(experiment_from_json(to_json(cfg)), cfg);
  EXPECT_EQ(model_from_json(to_json(cfg.model)), cfg.model);
  EXPECT_EQ(to_json(experiment_from_json(to_json(cfg))), to_json(cfg));

  const auto path = std::filesystem::temp_directory_path() / "orn_test_config.json";
  save_experiment(cfg, path.string());
  EXPECT_EQ(load_experiment(path.string()), cfg);
}

TEST(Config, EnumSpellings) {
  const auto j = json::parse(to_json(ExperimentConfig{}));
  EXPECT_EQ(j["model"]["backbone"]["blocks"][0]["inflation"], "2p5D");
  EXPECT_EQ(j["model"]["backbone"]["blocks"][1]["inflation"], "2D");
  EXPECT_EQ(j["world"]["task"], "ordered_swap");
  EXPECT_EQ(to_string(Inflation::k3D), "3D");
}

TEST(Config, MissingKeysKeepDefaults) {
  const auto cfg = experiment_from_json(R"({"optimizer": {"lr": 0.01}})");
  EXPECT_EQ(cfg.optimizer.lr, 0.01);
  EXPECT_EQ(cfg.train, TrainConfig{});
  EXPECT_EQ(cfg.model, ModelConfig{});
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(experiment_from_json(R"({"optimiser": {}})"), ConfigError);
  EXPECT_THROW(experiment_from_json(R"({"train": {"epoch": 3}})"), ConfigError);
  EXPECT_THROW(experiment_from_json(R"({"world": {"task": "juggling"}})"), ConfigError);
  EXPECT_THROW(experiment_from_json(R"({"model": {"pairing": {"mode": "pairs"}}})"), ConfigError);
  EXPECT_THROW(experiment_from_json("{not json"), ConfigError);
}

TEST(Config, AblationAxesReplaceTheDefault) {
  const auto cfg = experiment_from_json(R"({"ablation": {"axes": {"f_phi": ["mlp"]}}})");
  ASSERT_EQ(cfg.ablation.axes.size(), 1u);
  EXPECT_EQ(cfg.ablation.axes.at("f_phi"), std::vector<std::string>{"mlp"});
}

TEST(Config, ValidateCatchesInconsistencies) {
  EXPECT_NO_THROW(fixture::small_experiment().validate());
  EXPECT_NO_THROW(fixture::small_experiment(TaskKind::touch).validate());
  auto cfg = fixture::small_experiment();
  cfg.model.num_activities = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fixture::small_experiment(TaskKind::touch);
  cfg.model.multi_label = false;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fixture::small_experiment();
  cfg.model.pairing.clique_size = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fixture::small_experiment();
  cfg.model.frame_height = 30;
  cfg.world.height = 30;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = fixture::small_experiment();
  cfg.train.clip_length = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
