#pragma once

#include <cstdint>
#include <string>

#include "ctpt/model/checkpoint.hpp"
#include "ctpt/tokenizer/vocabulary.hpp"
#include "ctpt/train/dataset.hpp"

namespace ctpt {

struct FinetuneConfig {
  double learning_rate = 2e-5;
  int batch_size = 16;
  int epochs = 0;     // 0: use the dataset's epoch policy
  int max_len = 64;   // [CLS] + tokens + [SEP], truncated
  uint64_t seed = 1;
};

// Finetunes the full encoder plus a fresh classification head (CLS
// pooler -> softmax over the dataset's classes) and returns macro-F1 on
// the dev split. Deterministic given the seed. Throws when a class never
// occurs in the train split.
double finetune(const Checkpoint& checkpoint, const LabeledDataset& dataset,
                const Vocabulary& vocab, const FinetuneConfig& cfg);

}  // namespace ctpt
