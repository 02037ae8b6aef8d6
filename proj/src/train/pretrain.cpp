#include "ctpt/train/pretrain.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ctpt/model/encoder.hpp"
#include "ctpt/pretrain_data/generator.hpp"
#include "ctpt/pretrain_data/shard.hpp"
#include "ctpt/train/adam.hpp"
#include "ctpt/util/hash.hpp"
#include "ctpt/util/rng.hpp"

namespace ctpt {

namespace fs = std::filesystem;

namespace {

constexpr size_t kMaxEvalExamples = 1024;

std::string checkpoint_name(const std::string& dir, uint64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step-%07llu.ckpt",
                static_cast<unsigned long long>(step));
  return dir + "/" + buf;
}

// Batch membership is a pure function of (seed, step): shuffles are
// derived per epoch, reads wrap within the epoch's permutation. This is
// what makes interrupted runs resumable bit-exactly.
struct BatchSchedule {
  uint64_t seed;
  size_t n;
  int batch_size;
  uint64_t cached_epoch = ~0ull;
  std::vector<uint32_t> perm;

  const std::vector<uint32_t>& epoch_perm(uint64_t epoch) {
    if (epoch != cached_epoch) {
      perm.resize(n);
      for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
      Rng rng(mix64(seed ^ (epoch + 1)));
      rng.shuffle(perm);
      cached_epoch = epoch;
    }
    return perm;
  }

  void batch_indices(uint64_t step, std::vector<uint32_t>& out) {
    out.clear();
    uint64_t g = step * static_cast<uint64_t>(batch_size);
    uint64_t epoch = g / n;
    size_t pos = static_cast<size_t>(g % n);
    const auto& p = epoch_perm(epoch);
    for (int i = 0; i < batch_size; ++i) {
      out.push_back(p[(pos + i) % n]);
    }
  }
};

MetricsPoint evaluate(const Encoder<float>& enc, const ModelMats<float>& mats,
                      const std::vector<PretrainExample>& val, int batch_size,
                      const ModelConfig& config, uint64_t step) {
  MetricsPoint pt;
  pt.step = step;
  double w_sum = 0, mlm_loss = 0, mlm_acc = 0;
  double n_sum = 0, nsp_loss = 0, nsp_acc = 0;
  for (size_t start = 0; start < val.size(); start += batch_size) {
    size_t end = std::min(val.size(), start + batch_size);
    std::span<const PretrainExample> chunk(val.data() + start, end - start);
    PretrainBatch batch = make_batch(chunk, config);
    StackCache<float> cache;
    HeadCache<float> head;
    auto out = enc.forward(mats, batch, cache, head);
    mlm_loss += out.losses.mlm_loss * head.total_weight;
    mlm_acc += out.losses.mlm_acc * head.total_weight;
    w_sum += head.total_weight;
    double b = static_cast<double>(chunk.size());
    nsp_loss += out.losses.nsp_loss * b;
    nsp_acc += out.losses.nsp_acc * b;
    n_sum += b;
  }
  pt.mlm_loss = mlm_loss / w_sum;
  pt.mlm_acc = mlm_acc / w_sum;
  pt.nsp_loss = nsp_loss / n_sum;
  pt.nsp_acc = nsp_acc / n_sum;
  return pt;
}

}  // namespace

PretrainResult pretrain(const TrainConfig& cfg, const ModelConfig& model_config,
                        const std::string& shard_dir, const std::string& ckpt_dir,
                        const std::string& resume_checkpoint,
                        std::optional<uint64_t> stop_after_step) {
  cfg.validate();
  model_config.validate();
  fs::create_directories(ckpt_dir);

  ShardSet manifest = load_manifest(shard_dir);
  if (manifest.example_count == 0) throw data_error("pretrain: empty shard set");
  std::vector<std::string> train_paths, val_paths;
  for (const auto& s : manifest.shards) train_paths.push_back(shard_dir + "/" + s);
  for (const auto& s : manifest.validation_shards) {
    val_paths.push_back(shard_dir + "/" + s);
  }
  std::vector<PretrainExample> train = read_all_examples(train_paths);
  std::vector<PretrainExample> val = read_all_examples(val_paths);
  if (val.empty()) {
    // No held-out shards (tiny corpus): fall back to a fixed train prefix.
    val.assign(train.begin(),
               train.begin() + std::min(train.size(), kMaxEvalExamples));
  } else if (val.size() > kMaxEvalExamples) {
    val.resize(kMaxEvalExamples);
  }

  Parameters params;
  OptimizerState opt;
  uint64_t start_step = 0;
  if (!resume_checkpoint.empty()) {
    Checkpoint ckpt = load_checkpoint(resume_checkpoint, &model_config);
    params = std::move(ckpt.params);
    opt = std::move(ckpt.opt);
    start_step = ckpt.step;
  } else {
    params = init_params(model_config);
    opt = OptimizerState::zeros(model_config);
  }

  Encoder<float> enc(model_config);
  AdamConfig adam{.lr = cfg.learning_rate};
  BatchSchedule schedule{cfg.seed, train.size(), cfg.batch_size};

  std::ofstream metrics_log(ckpt_dir + "/metrics.csv");
  metrics_log << "step,mlm_loss,mlm_acc,nsp_loss,nsp_acc\n";

  PretrainResult result;
  std::string last_good = resume_checkpoint;
  auto save = [&](uint64_t step) {
    std::string path = checkpoint_name(ckpt_dir, step);
    save_checkpoint({params, opt, step}, path);
    last_good = path;
    return path;
  };
  auto record = [&](const MetricsPoint& pt) {
    result.metrics.push_back(pt);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%.17g,%.17g",
                  static_cast<unsigned long long>(pt.step), pt.mlm_loss,
                  pt.mlm_acc, pt.nsp_loss, pt.nsp_acc);
    metrics_log << buf << "\n" << std::flush;
  };

  if (start_step == 0) {
    save(0);
    record(evaluate(enc, params.mats, val, cfg.batch_size, model_config, 0));
  }

  std::vector<uint32_t> indices;
  std::vector<PretrainExample> batch_examples;
  for (uint64_t s = start_step; s < cfg.total_steps; ++s) {
    schedule.batch_indices(s, indices);
    batch_examples.clear();
    for (uint32_t idx : indices) batch_examples.push_back(train[idx]);
    PretrainBatch batch = make_batch(batch_examples, model_config);

    StackCache<float> cache;
    HeadCache<float> head;
    auto out = enc.forward(params.mats, batch, cache, head);
    if (!std::isfinite(out.losses.total())) {
      throw numeric_error("pretrain: non-finite loss at step " +
                          std::to_string(s + 1) + "; last good checkpoint: " +
                          (last_good.empty() ? "<none>" : last_good));
    }
    ModelMats<float> grads = enc.backward(params.mats, batch, cache, head);
    adam_update(params, opt, grads, adam);

    uint64_t step = s + 1;
    bool at_ckpt = step % cfg.checkpoint_interval == 0 || step == cfg.total_steps;
    bool at_eval = step % cfg.eval_interval == 0 || step == cfg.total_steps;
    if (at_ckpt) save(step);
    if (at_eval) {
      record(evaluate(enc, params.mats, val, cfg.batch_size, model_config, step));
    }
    if (stop_after_step && step >= *stop_after_step) break;
  }

  result.final_checkpoint = last_good;
  return result;
}

}  // namespace ctpt
