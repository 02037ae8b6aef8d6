#include "ctpt/train/finetune.hpp"

#include <algorithm>
#include <cmath>

#include "ctpt/model/encoder.hpp"
#include "ctpt/tokenizer/wordpiece.hpp"
#include "ctpt/train/adam.hpp"
#include "ctpt/train/stats.hpp"
#include "ctpt/util/hash.hpp"
#include "ctpt/util/rng.hpp"

namespace ctpt {

namespace {

struct EncodedExample {
  std::vector<uint32_t> ids;  // [CLS] tokens [SEP]
  int label = 0;
};

std::vector<EncodedExample> encode_split(const std::vector<LabeledExample>& split,
                                         const Vocabulary& vocab, int max_len) {
  std::vector<EncodedExample> out;
  out.reserve(split.size());
  for (const auto& ex : split) {
    TokenSequence seq = encode(ex.text, vocab);
    EncodedExample e;
    e.label = ex.label;
    e.ids.push_back(kClsId);
    size_t budget = static_cast<size_t>(max_len) - 2;
    for (size_t k = 0; k < seq.ids.size() && k < budget; ++k) {
      e.ids.push_back(seq.ids[k]);
    }
    e.ids.push_back(kSepId);
    out.push_back(std::move(e));
  }
  return out;
}

ClassifyBatch make_classify_batch(const std::vector<EncodedExample>& pool,
                                  const std::vector<uint32_t>& indices) {
  ClassifyBatch batch;
  batch.B = static_cast<int>(indices.size());
  size_t max_len = 0;
  for (uint32_t i : indices) max_len = std::max(max_len, pool[i].ids.size());
  batch.L = static_cast<int>(max_len);
  for (uint32_t i : indices) {
    const auto& ex = pool[i];
    for (size_t t = 0; t < max_len; ++t) {
      batch.ids.push_back(t < ex.ids.size() ? ex.ids[t] : kPadId);
      batch.mask.push_back(t < ex.ids.size() ? 1 : 0);
    }
    batch.labels.push_back(ex.label);
  }
  return batch;
}

// Adam over the four head tensors, sharing the encoder's step counter.
struct HeadMoments {
  RowMat<float> m_pool_w, m_pool_b, m_cls_w, m_cls_b;
  RowMat<float> v_pool_w, v_pool_b, v_cls_w, v_cls_b;
};

void head_adam_step(ClassifierHead& head, HeadMoments& mom,
                    const Encoder<float>::HeadGrads& g, uint64_t t,
                    const AdamConfig& cfg) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  auto step_one = [&](RowMat<float>& p, RowMat<float>& m, RowMat<float>& v,
                      const RowMat<float>& grad) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      double gk = grad.data()[k];
      double mk = cfg.beta1 * m.data()[k] + (1.0 - cfg.beta1) * gk;
      double vk = cfg.beta2 * v.data()[k] + (1.0 - cfg.beta2) * gk * gk;
      m.data()[k] = static_cast<float>(mk);
      v.data()[k] = static_cast<float>(vk);
      p.data()[k] = static_cast<float>(
          p.data()[k] - cfg.lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.eps));
    }
  };
  step_one(head.pool_w, mom.m_pool_w, mom.v_pool_w, g.pool_w);
  step_one(head.pool_b, mom.m_pool_b, mom.v_pool_b, g.pool_b);
  step_one(head.cls_w, mom.m_cls_w, mom.v_cls_w, g.cls_w);
  step_one(head.cls_b, mom.m_cls_b, mom.v_cls_b, g.cls_b);
}

}  // namespace

double finetune(const Checkpoint& checkpoint, const LabeledDataset& dataset,
                const Vocabulary& vocab, const FinetuneConfig& cfg) {
  const int num_classes = static_cast<int>(dataset.classes.size());
  if (num_classes < 2) throw data_error("finetune: need at least 2 classes");
  std::vector<bool> seen(num_classes, false);
  for (const auto& ex : dataset.train) seen[ex.label] = true;
  for (int c = 0; c < num_classes; ++c) {
    if (!seen[c]) {
      throw data_error("finetune: class '" + dataset.classes[c] +
                       "' absent from train split of " + dataset.name);
    }
  }

  Parameters params = checkpoint.params;  // finetuning works on a copy
  const ModelConfig& config = params.config;
  Encoder<float> enc(config);

  auto train = encode_split(dataset.train, vocab, cfg.max_len);
  auto dev = encode_split(dataset.dev, vocab, cfg.max_len);

  ClassifierHead head = init_classifier(params, num_classes, cfg.seed);
  HeadMoments mom;
  auto zeros_like = [](const RowMat<float>& m) {
    return RowMat<float>::Zero(m.rows(), m.cols()).eval();
  };
  mom.m_pool_w = zeros_like(head.pool_w);
  mom.v_pool_w = zeros_like(head.pool_w);
  mom.m_pool_b = zeros_like(head.pool_b);
  mom.v_pool_b = zeros_like(head.pool_b);
  mom.m_cls_w = zeros_like(head.cls_w);
  mom.v_cls_w = zeros_like(head.cls_w);
  mom.m_cls_b = zeros_like(head.cls_b);
  mom.v_cls_b = zeros_like(head.cls_b);
  OptimizerState opt = OptimizerState::zeros(config);

  AdamConfig adam{.lr = cfg.learning_rate};
  const int epochs = cfg.epochs > 0 ? cfg.epochs : dataset.epochs;

  std::vector<uint32_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(mix64(cfg.seed ^ (static_cast<uint64_t>(epoch) + 1)));
    rng.shuffle(order);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<uint32_t> indices(order.begin() + start, order.begin() + end);
      ClassifyBatch batch = make_classify_batch(train, indices);

      StackCache<float> cache;
      auto out = enc.classify_forward(params.mats, head.pool_w, head.pool_b,
                                      head.cls_w, head.cls_b, batch, cache);
      if (!std::isfinite(out.loss)) {
        throw numeric_error("finetune: non-finite loss on " + dataset.name);
      }
      auto [grads, head_grads] = enc.classify_backward(
          params.mats, head.pool_w, head.cls_w, batch, cache, out);
      adam_update(params, opt, grads, adam);
      head_adam_step(head, mom, head_grads, opt.step, adam);
    }
  }

  // Dev macro-F1.
  std::vector<int> predictions, golds;
  for (size_t start = 0; start < dev.size();
       start += static_cast<size_t>(cfg.batch_size)) {
    size_t end = std::min(dev.size(), start + cfg.batch_size);
    std::vector<uint32_t> indices;
    for (size_t i = start; i < end; ++i) indices.push_back(static_cast<uint32_t>(i));
    ClassifyBatch batch = make_classify_batch(dev, indices);
    StackCache<float> cache;
    auto out = enc.classify_forward(params.mats, head.pool_w, head.pool_b,
                                    head.cls_w, head.cls_b, batch, cache);
    for (int b = 0; b < batch.B; ++b) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < out.logits.cols(); ++j) {
        if (out.logits(b, j) > out.logits(b, best)) best = j;
      }
      predictions.push_back(static_cast<int>(best));
      golds.push_back(batch.labels[b]);
    }
  }
  return macro_f1(predictions, golds, num_classes);
}

}  // namespace ctpt
