#pragma once

#include "orn/config.hpp"
#include "orn/world.hpp"

namespace orn::fixture {

// A small but complete experiment on 32 x 32 videos that trains in seconds.
inline ExperimentConfig small_experiment(TaskKind task = TaskKind::ordered_swap) {
  ExperimentConfig cfg;
  cfg.world.task = task;
  cfg.world.train_videos = 64;
  cfg.world.val_videos = 32;
  const std::size_t channels[] = {4, 8, 8, 8};
  for (std::size_t i = 0; i < cfg.model.backbone.blocks.size(); ++i) {
    cfg.model.backbone.blocks[i].channels_out = channels[i];
  }
  cfg.model.descriptors.mask_grid = 8;
  cfg.model.descriptors.shape_hidden = 8;
  cfg.model.descriptors.shape_dim = 4;
  cfg.model.reasoning = {16, 12, 12, 16};
  cfg.model.context.state_dim = 12;
  cfg.model.num_activities = cfg.world.num_activities();
  cfg.model.multi_label = cfg.world.multi_label();
  cfg.optimizer.lr = 3e-3;
  cfg.train.batch_size = 8;
  cfg.train.epochs = 2;
  cfg.train.eval_clips = 2;
  cfg.train.log_wall_time = false;
  return cfg;
}

}  // namespace orn::fixture
