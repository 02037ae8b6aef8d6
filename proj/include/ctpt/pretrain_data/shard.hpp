#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "ctpt/pretrain_data/example.hpp"

namespace ctpt {

// Fixed-size little-endian records behind a small header:
//   magic "CTPT", u32 version=1, u64 count
//   per record: 96 x u32 ids, 96 x u8 mask, 96 x u8 segment, u8 nprd,
//               14 x u16 positions, 14 x u32 labels, 14 x f32 weights, u8 nsp
class ShardWriter {
 public:
  explicit ShardWriter(const std::string& path);
  ~ShardWriter();
  ShardWriter(const ShardWriter&) = delete;
  ShardWriter& operator=(const ShardWriter&) = delete;

  void write(const PretrainExample& ex);
  // Patches the header count and closes the file.
  void close();
  uint64_t count() const { return count_; }

 private:
  std::FILE* f_ = nullptr;
  std::string path_;
  uint64_t count_ = 0;
};

class ShardReader {
 public:
  explicit ShardReader(const std::string& path);
  ~ShardReader();
  ShardReader(const ShardReader&) = delete;
  ShardReader& operator=(const ShardReader&) = delete;

  // False once header-count examples have been yielded. Throws on
  // truncation, identifying the record index and byte offset.
  bool next(PretrainExample& out);
  uint64_t count() const { return count_; }

 private:
  std::FILE* f_ = nullptr;
  std::string path_;
  uint64_t count_ = 0;
  uint64_t read_ = 0;
};

std::vector<PretrainExample> read_all_examples(const std::vector<std::string>& paths);

}  // namespace ctpt
