#pragma once

#include <cstdint>
#include <string>

#include "ctpt/model/params.hpp"

namespace ctpt {

// Adam first/second moments, stored alongside the parameters so a resumed
// run continues bit-exactly.
struct OptimizerState {
  ModelMats<float> m;
  ModelMats<float> v;
  uint64_t step = 0;  // number of updates applied

  static OptimizerState zeros(const ModelConfig& c) {
    return {ModelMats<float>::zeros(c), ModelMats<float>::zeros(c), 0};
  }
};

struct Checkpoint {
  Parameters params;
  OptimizerState opt;
  uint64_t step = 0;  // training step at save time
};

// Single file: magic "CTCK", u32 version, u64 manifest length, JSON
// manifest (config + step), then self-describing tensor blobs
// (u32 name length, name, u32 rank, u64 dims, f32 row-major data).
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// expected_config, when given, must match the stored config exactly.
Checkpoint load_checkpoint(const std::string& path,
                           const ModelConfig* expected_config = nullptr);

}  // namespace ctpt
