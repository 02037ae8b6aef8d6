#include "ctpt/model/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpt/util/error.hpp"

namespace ctpt {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'C', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_bytes(std::FILE* f, const void* p, size_t n, const std::string& path) {
  if (std::fwrite(p, 1, n, f) != n) {
    throw data_error("checkpoint: write failed on " + path);
  }
}

void read_bytes(std::FILE* f, void* p, size_t n, const std::string& path) {
  if (std::fread(p, 1, n, f) != n) {
    throw data_error("checkpoint: truncated file " + path);
  }
}

void write_tensor(std::FILE* f, const std::string& name,
                  const RowMat<float>& mat, const std::string& path) {
  uint32_t name_len = static_cast<uint32_t>(name.size());
  write_bytes(f, &name_len, 4, path);
  write_bytes(f, name.data(), name.size(), path);
  uint32_t rank = 2;
  write_bytes(f, &rank, 4, path);
  uint64_t dims[2] = {static_cast<uint64_t>(mat.rows()),
                      static_cast<uint64_t>(mat.cols())};
  write_bytes(f, dims, 16, path);
  write_bytes(f, mat.data(), sizeof(float) * mat.size(), path);
}

void read_tensor(std::FILE* f, const std::string& expected_name,
                 RowMat<float>& mat, const std::string& path) {
  uint32_t name_len;
  read_bytes(f, &name_len, 4, path);
  std::string name(name_len, '\0');
  read_bytes(f, name.data(), name_len, path);
  if (name != expected_name) {
    throw data_error("checkpoint: expected tensor " + expected_name + ", found " +
                     name + " in " + path);
  }
  uint32_t rank;
  read_bytes(f, &rank, 4, path);
  if (rank != 2) {
    throw data_error("checkpoint: tensor " + name + " has rank " +
                     std::to_string(rank) + ", expected 2");
  }
  uint64_t dims[2];
  read_bytes(f, dims, 16, path);
  if (dims[0] != static_cast<uint64_t>(mat.rows()) ||
      dims[1] != static_cast<uint64_t>(mat.cols())) {
    throw data_error("checkpoint: tensor " + name + " has shape [" +
                     std::to_string(dims[0]) + "," + std::to_string(dims[1]) +
                     "], expected [" + std::to_string(mat.rows()) + "," +
                     std::to_string(mat.cols()) + "]");
  }
  read_bytes(f, mat.data(), sizeof(float) * mat.size(), path);
}

json config_to_json(const ModelConfig& c) {
  return json{{"layers", c.layers},     {"hidden", c.hidden},
              {"heads", c.heads},       {"ff_dim", c.ff_dim},
              {"vocab_size", c.vocab_size}, {"max_seq", c.max_seq},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.heads = j.at("heads").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.max_seq = j.at("max_seq").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw data_error("checkpoint: cannot open " + path + " for writing");

  json manifest{{"config", config_to_json(ckpt.params.config)},
                {"step", ckpt.step},
                {"optimizer_step", ckpt.opt.step}};
  std::string m = manifest.dump();
  write_bytes(f.get(), kMagic, 4, path);
  write_bytes(f.get(), &kVersion, 4, path);
  uint64_t mlen = m.size();
  write_bytes(f.get(), &mlen, 8, path);
  write_bytes(f.get(), m.data(), m.size(), path);

  auto params = tensor_list(const_cast<ModelMats<float>&>(ckpt.params.mats));
  for (auto& [name, mat] : params) write_tensor(f.get(), name, *mat, path);
  auto mm = tensor_list(const_cast<ModelMats<float>&>(ckpt.opt.m));
  for (auto& [name, mat] : mm) write_tensor(f.get(), "adam_m/" + name, *mat, path);
  auto vv = tensor_list(const_cast<ModelMats<float>&>(ckpt.opt.v));
  for (auto& [name, mat] : vv) write_tensor(f.get(), "adam_v/" + name, *mat, path);
}

Checkpoint load_checkpoint(const std::string& path,
                           const ModelConfig* expected_config) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw data_error("checkpoint: cannot open " + path);

  char magic[4];
  read_bytes(f.get(), magic, 4, path);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw data_error("checkpoint: bad magic in " + path);
  }
  uint32_t version;
  read_bytes(f.get(), &version, 4, path);
  if (version != kVersion) {
    throw data_error("checkpoint: unsupported version " +
                     std::to_string(version) + " in " + path);
  }
  uint64_t mlen;
  read_bytes(f.get(), &mlen, 8, path);
  std::string mstr(mlen, '\0');
  read_bytes(f.get(), mstr.data(), mlen, path);
  json manifest = json::parse(mstr);

  Checkpoint ckpt;
  ckpt.params.config = config_from_json(manifest.at("config"));
  ckpt.params.config.validate();
  if (expected_config && !(ckpt.params.config == *expected_config)) {
    throw data_error("checkpoint: stored config does not match expected config");
  }
  ckpt.step = manifest.at("step").get<uint64_t>();
  ckpt.params.mats = ModelMats<float>::zeros(ckpt.params.config);
  ckpt.opt = OptimizerState::zeros(ckpt.params.config);
  ckpt.opt.step = manifest.at("optimizer_step").get<uint64_t>();

  for (auto& [name, mat] : tensor_list(ckpt.params.mats)) {
    read_tensor(f.get(), name, *mat, path);
  }
  for (auto& [name, mat] : tensor_list(ckpt.opt.m)) {
    read_tensor(f.get(), "adam_m/" + name, *mat, path);
  }
  for (auto& [name, mat] : tensor_list(ckpt.opt.v)) {
    read_tensor(f.get(), "adam_v/" + name, *mat, path);
  }
  return ckpt;
}

}  // namespace ctpt
