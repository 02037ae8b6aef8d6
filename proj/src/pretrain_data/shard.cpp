#include "ctpt/pretrain_data/shard.hpp"

#include <bit>
#include <cstring>

#include "ctpt/util/error.hpp"

namespace ctpt {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'P', 'T'};
constexpr uint32_t kVersion = 1;
constexpr size_t kHeaderBytes = 4 + 4 + 8;
constexpr size_t kRecordBytes = kSeqLen * 4 + kSeqLen + kSeqLen + 1 +
                                kMaxPredictions * 2 + kMaxPredictions * 4 +
                                kMaxPredictions * 4 + 1;

// The serialized layout is little-endian by definition; on the platforms
// this builds for, host order matches, so fields are memcpy'd.
static_assert(std::endian::native == std::endian::little);

void put(std::vector<unsigned char>& buf, const void* p, size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  buf.insert(buf.end(), b, b + n);
}

}  // namespace

ShardWriter::ShardWriter(const std::string& path) : path_(path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw data_error("shard: cannot open " + path + " for writing");
  unsigned char header[kHeaderBytes] = {};
  std::memcpy(header, kMagic, 4);
  std::memcpy(header + 4, &kVersion, 4);
  uint64_t zero = 0;
  std::memcpy(header + 8, &zero, 8);
  if (std::fwrite(header, 1, kHeaderBytes, f_) != kHeaderBytes) {
    throw data_error("shard: write failed on " + path);
  }
}

ShardWriter::~ShardWriter() {
  if (f_) close();
}

void ShardWriter::write(const PretrainExample& ex) {
  std::vector<unsigned char> buf;
  buf.reserve(kRecordBytes);
  put(buf, ex.input_ids.data(), kSeqLen * 4);
  put(buf, ex.input_mask.data(), kSeqLen);
  put(buf, ex.segment_ids.data(), kSeqLen);
  put(buf, &ex.num_predictions, 1);
  put(buf, ex.masked_positions.data(), kMaxPredictions * 2);
  put(buf, ex.masked_label_ids.data(), kMaxPredictions * 4);
  put(buf, ex.masked_weights.data(), kMaxPredictions * 4);
  put(buf, &ex.nsp_label, 1);
  if (std::fwrite(buf.data(), 1, buf.size(), f_) != buf.size()) {
    throw data_error("shard: write failed on " + path_);
  }
  ++count_;
}

void ShardWriter::close() {
  if (!f_) return;
  std::fseek(f_, 8, SEEK_SET);
  if (std::fwrite(&count_, 8, 1, f_) != 1) {
    std::fclose(f_);
    f_ = nullptr;
    throw data_error("shard: header patch failed on " + path_);
  }
  std::fclose(f_);
  f_ = nullptr;
}

ShardReader::ShardReader(const std::string& path) : path_(path) {
  f_ = std::fopen(path.c_str(), "rb");
  if (!f_) throw data_error("shard: cannot open " + path);
  unsigned char header[kHeaderBytes];
  if (std::fread(header, 1, kHeaderBytes, f_) != kHeaderBytes) {
    throw data_error("shard: truncated header in " + path);
  }
  if (std::memcmp(header, kMagic, 4) != 0) {
    throw data_error("shard: bad magic in " + path);
  }
  uint32_t version;
  std::memcpy(&version, header + 4, 4);
  if (version != kVersion) {
    throw data_error("shard: unsupported version " + std::to_string(version) +
                     " in " + path);
  }
  std::memcpy(&count_, header + 8, 8);
}

ShardReader::~ShardReader() {
  if (f_) std::fclose(f_);
}

bool ShardReader::next(PretrainExample& out) {
  if (read_ >= count_) return false;
  unsigned char buf[kRecordBytes];
  size_t got = std::fread(buf, 1, kRecordBytes, f_);
  if (got != kRecordBytes) {
    throw data_error("shard: truncated record " + std::to_string(read_) +
                     " at byte offset " +
                     std::to_string(kHeaderBytes + read_ * kRecordBytes + got) +
                     " in " + path_);
  }
  size_t off = 0;
  auto get = [&](void* p, size_t n) {
    std::memcpy(p, buf + off, n);
    off += n;
  };
  get(out.input_ids.data(), kSeqLen * 4);
  get(out.input_mask.data(), kSeqLen);
  get(out.segment_ids.data(), kSeqLen);
  get(&out.num_predictions, 1);
  get(out.masked_positions.data(), kMaxPredictions * 2);
  get(out.masked_label_ids.data(), kMaxPredictions * 4);
  get(out.masked_weights.data(), kMaxPredictions * 4);
  get(&out.nsp_label, 1);
  ++read_;
  return true;
}

std::vector<PretrainExample> read_all_examples(
    const std::vector<std::string>& paths) {
  std::vector<PretrainExample> out;
  for (const auto& p : paths) {
    ShardReader reader(p);
    PretrainExample ex;
    while (reader.next(ex)) out.push_back(ex);
  }
  return out;
}

}  // namespace ctpt
