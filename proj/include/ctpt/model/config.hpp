#pragma once

#include <cstdint>

#include "ctpt/pretrain_data/example.hpp"
#include "ctpt/util/error.hpp"

namespace ctpt {

struct ModelConfig {
  int layers = 4;
  int hidden = 128;
  int heads = 4;
  int ff_dim = 512;
  int vocab_size = 0;
  int max_seq = static_cast<int>(kSeqLen);
  uint64_t seed = 1;

  void validate() const {
    if (layers < 1) throw data_error("ModelConfig: layers must be >= 1");
    if (hidden < 1) throw data_error("ModelConfig: hidden must be >= 1");
    if (heads < 1) throw data_error("ModelConfig: heads must be >= 1");
    if (ff_dim < 1) throw data_error("ModelConfig: ff_dim must be >= 1");
    if (vocab_size < 1) throw data_error("ModelConfig: vocab_size must be >= 1");
    if (max_seq < 3) throw data_error("ModelConfig: max_seq must be >= 3");
    if (hidden % heads != 0) {
      throw data_error("ModelConfig: hidden must be divisible by heads");
    }
  }

  int head_dim() const { return hidden / heads; }

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace ctpt
