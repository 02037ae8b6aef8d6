#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctpt/model/checkpoint.hpp"
#include "ctpt/pretrain_data/example.hpp"
#include "ctpt/util/error.hpp"

namespace ctpt {

struct TrainConfig {
  double learning_rate = 2e-5;  // constant, no schedule
  int batch_size = 32;
  uint64_t total_steps = 2500;
  uint64_t checkpoint_interval = 500;
  uint64_t eval_interval = 100;
  uint64_t seed = 1;

  void validate() const {
    if (learning_rate <= 0) throw data_error("TrainConfig: learning_rate <= 0");
    if (batch_size < 1) throw data_error("TrainConfig: batch_size < 1");
    if (total_steps < 1) throw data_error("TrainConfig: total_steps < 1");
    if (checkpoint_interval < 1 || eval_interval < 1) {
      throw data_error("TrainConfig: intervals must be positive");
    }
    if (checkpoint_interval > total_steps) {
      throw data_error("TrainConfig: checkpoint_interval > total_steps");
    }
  }
};

struct MetricsPoint {
  uint64_t step = 0;
  double mlm_loss = 0, mlm_acc = 0, nsp_loss = 0, nsp_acc = 0;

  bool operator==(const MetricsPoint&) const = default;
};

struct PretrainResult {
  std::string final_checkpoint;
  std::vector<MetricsPoint> metrics;  // from the starting step onward
};

// Pretraining loop over a generated shard directory. Checkpoints land in
// ckpt_dir as step-NNNNNNN.ckpt at step 0 (untrained baseline), every
// checkpoint_interval steps and at the final step; metrics are evaluated
// on the held-out validation shards every eval_interval steps and logged
// to ckpt_dir/metrics.csv. Batch order is a pure function of (seed,
// step), so resuming from any checkpoint reproduces the uninterrupted
// run bit-exactly. A non-finite loss aborts before touching any
// checkpoint on disk.
//
// stop_after_step, when set, ends the run early right after the given
// step's checkpoint/metrics work (used to exercise resume).
PretrainResult pretrain(const TrainConfig& cfg, const ModelConfig& model_config,
                        const std::string& shard_dir, const std::string& ckpt_dir,
                        const std::string& resume_checkpoint = "",
                        std::optional<uint64_t> stop_after_step = std::nullopt);

}  // namespace ctpt
