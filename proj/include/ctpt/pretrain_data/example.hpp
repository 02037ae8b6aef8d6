#pragma once

#include <array>
#include <cstdint>

namespace ctpt {

inline constexpr size_t kSeqLen = 96;
// round(96 * 0.15)
inline constexpr size_t kMaxPredictions = 14;

inline constexpr uint8_t kNspIsNext = 0;
inline constexpr uint8_t kNspRandom = 1;

// One MLM+NSP training instance. Layout is
// [CLS] A-tokens [SEP] B-tokens [SEP] PAD... with segment ids 0 over
// [CLS]..first [SEP] and 1 over B..second [SEP].
struct PretrainExample {
  std::array<uint32_t, kSeqLen> input_ids{};
  std::array<uint8_t, kSeqLen> input_mask{};   // 1 = real token
  std::array<uint8_t, kSeqLen> segment_ids{};  // 0 or 1
  uint8_t num_predictions = 0;
  std::array<uint16_t, kMaxPredictions> masked_positions{};
  std::array<uint32_t, kMaxPredictions> masked_label_ids{};
  std::array<float, kMaxPredictions> masked_weights{};
  uint8_t nsp_label = kNspIsNext;

  bool operator==(const PretrainExample&) const = default;
};

}  // namespace ctpt
