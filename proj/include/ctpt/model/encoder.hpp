#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ctpt/model/params.hpp"
#include "ctpt/pretrain_data/example.hpp"
#include "ctpt/util/error.hpp"

namespace ctpt {

// Flattened batch of pretraining examples; rows index (example, position).
struct PretrainBatch {
  int B = 0;
  int L = 0;
  std::vector<uint32_t> ids;      // B*L
  std::vector<uint8_t> mask;      // B*L, 1 = real token
  std::vector<uint8_t> segs;      // B*L
  std::vector<uint32_t> slot_row;    // B*kMaxPredictions, absolute row index
  std::vector<uint32_t> slot_label;  // B*kMaxPredictions
  std::vector<double> slot_weight;   // B*kMaxPredictions, 0 or 1
  std::vector<uint8_t> nsp_label;    // B
};

inline PretrainBatch make_batch(std::span<const PretrainExample> examples,
                                const ModelConfig& config) {
  if (examples.empty()) throw data_error("empty batch");
  PretrainBatch b;
  b.B = static_cast<int>(examples.size());
  b.L = config.max_seq;
  for (size_t e = 0; e < examples.size(); ++e) {
    const auto& ex = examples[e];
    for (size_t t = 0; t < kSeqLen; ++t) {
      if (ex.input_ids[t] >= static_cast<uint32_t>(config.vocab_size)) {
        throw data_error("input id " + std::to_string(ex.input_ids[t]) +
                         " out of range at batch " + std::to_string(e) +
                         " position " + std::to_string(t));
      }
      b.ids.push_back(ex.input_ids[t]);
      b.mask.push_back(ex.input_mask[t]);
      b.segs.push_back(ex.segment_ids[t]);
    }
    for (size_t k = 0; k < kMaxPredictions; ++k) {
      b.slot_row.push_back(static_cast<uint32_t>(e * kSeqLen) +
                           ex.masked_positions[k]);
      b.slot_label.push_back(ex.masked_label_ids[k]);
      b.slot_weight.push_back(ex.masked_weights[k]);
    }
    b.nsp_label.push_back(ex.nsp_label);
  }
  return b;
}

// Classification batch: [CLS] tokens [SEP], single segment, padded to the
// longest sequence in the batch.
struct ClassifyBatch {
  int B = 0;
  int L = 0;
  std::vector<uint32_t> ids;
  std::vector<uint8_t> mask;
  std::vector<int> labels;  // B
};

struct LossStats {
  double mlm_loss = 0, mlm_acc = 0, nsp_loss = 0, nsp_acc = 0;
  double total() const { return mlm_loss + nsp_loss; }
};

namespace detail {

template <typename S>
struct LnCache {
  Eigen::Matrix<S, Eigen::Dynamic, 1> rstd;
  RowMat<S> xhat;
};

constexpr double kLnEps = 1e-12;
constexpr double kMaskPenalty = -1e9;

// y = gamma * xhat + beta, per row.
template <typename S>
void ln_forward(const RowMat<S>& x, const RowMat<S>& g, const RowMat<S>& b,
                RowMat<S>& y, LnCache<S>& cache) {
  const Eigen::Index n = x.rows(), h = x.cols();
  cache.rstd.resize(n);
  cache.xhat.resize(n, h);
  y.resize(n, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    S mu = x.row(i).mean();
    S var = (x.row(i).array() - mu).square().mean();
    S rstd = S(1) / std::sqrt(var + S(kLnEps));
    cache.rstd(i) = rstd;
    cache.xhat.row(i) = (x.row(i).array() - mu) * rstd;
    y.row(i) = cache.xhat.row(i).cwiseProduct(g.row(0)) + b.row(0);
  }
}

template <typename S>
void ln_backward(const RowMat<S>& dy, const RowMat<S>& g,
                 const LnCache<S>& cache, RowMat<S>& dx, RowMat<S>& dg,
                 RowMat<S>& db) {
  const Eigen::Index n = dy.rows(), h = dy.cols();
  dx.resize(n, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    dg.row(0) += dy.row(i).cwiseProduct(cache.xhat.row(i));
    db.row(0) += dy.row(i);
    auto dxhat = dy.row(i).cwiseProduct(g.row(0));
    S m1 = dxhat.mean();
    S m2 = dxhat.cwiseProduct(cache.xhat.row(i)).mean();
    dx.row(i) = cache.rstd(i) *
                (dxhat.array() - m1 - cache.xhat.row(i).array() * m2);
  }
  (void)h;
}

template <typename S>
S gelu(S x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double a = 0.044715;
  double xd = static_cast<double>(x);
  return static_cast<S>(0.5 * xd * (1.0 + std::tanh(c * (xd + a * xd * xd * xd))));
}

template <typename S>
S gelu_grad(S x) {
  constexpr double c = 0.7978845608028654;
  constexpr double a = 0.044715;
  double xd = static_cast<double>(x);
  double u = c * (xd + a * xd * xd * xd);
  double t = std::tanh(u);
  return static_cast<S>(0.5 * (1.0 + t) +
                        0.5 * xd * (1.0 - t * t) * c * (1.0 + 3.0 * a * xd * xd));
}

// First index wins ties; deterministic across scalar types.
template <typename Row>
Eigen::Index argmax_row(const Row& row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return best;
}

template <typename S>
void softmax_rows(RowMat<S>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    S mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

template <typename S>
struct LayerCache {
  RowMat<S> input;
  RowMat<S> q, k, v;
  std::vector<RowMat<S>> probs;  // B*heads entries of L x L
  RowMat<S> ctx;
  LnCache<S> ln1;
  RowMat<S> ln1_out;
  RowMat<S> ff_pre, ff_act;
  LnCache<S> ln2;
  RowMat<S> out;
};

}  // namespace detail

template <typename S>
struct StackCache {
  int B = 0, L = 0;
  RowMat<S> emb_sum;
  detail::LnCache<S> emb_ln;
  RowMat<S> emb_out;
  std::vector<detail::LayerCache<S>> layers;
  const RowMat<S>& final_hidden() const {
    return layers.empty() ? emb_out : layers.back().out;
  }
};

template <typename S>
struct HeadCache {
  RowMat<S> gathered;       // K x H rows fed to the MLM transform
  RowMat<S> mlm_pre;        // K x H pre-GELU
  detail::LnCache<S> mlm_ln;
  RowMat<S> mlm_hidden;     // K x H after LN
  RowMat<S> mlm_probs;      // K x V
  RowMat<S> cls_rows;       // B x H hidden at [CLS]
  RowMat<S> pooled;         // B x H after tanh pooler
  RowMat<S> nsp_probs;      // B x 2
  double total_weight = 0;
};

template <typename S>
struct ForwardOutput {
  RowMat<S> mlm_logits;  // (B*kMaxPredictions) x V
  RowMat<S> nsp_logits;  // B x 2
  LossStats losses;
};

template <typename S>
class Encoder {
 public:
  explicit Encoder(const ModelConfig& config) : c_(config) { c_.validate(); }

  const ModelConfig& config() const { return c_; }

  // Embeddings + L transformer blocks. ids/mask/segs have B*L entries.
  void stack_forward(const ModelMats<S>& m, const std::vector<uint32_t>& ids,
                     const std::vector<uint8_t>& mask,
                     const std::vector<uint8_t>& segs, int B, int L,
                     StackCache<S>& cache) const {
    const int H = c_.hidden;
    const int N = B * L;
    cache.B = B;
    cache.L = L;
    cache.emb_sum.resize(N, H);
    for (int n = 0; n < N; ++n) {
      cache.emb_sum.row(n) = m.tok_emb.row(ids[n]) + m.pos_emb.row(n % L) +
                             m.seg_emb.row(segs[n]);
    }
    detail::ln_forward(cache.emb_sum, m.emb_ln_g, m.emb_ln_b, cache.emb_out,
                       cache.emb_ln);
    cache.layers.resize(c_.layers);
    const RowMat<S>* x = &cache.emb_out;
    for (int l = 0; l < c_.layers; ++l) {
      layer_forward(m.layers[l], *x, mask, B, L, cache.layers[l]);
      if (!cache.layers[l].out.allFinite()) {
        throw numeric_error("non-finite activations in layer " +
                            std::to_string(l));
      }
      x = &cache.layers[l].out;
    }
  }

  // dX is the gradient at the stack output; fills encoder grads.
  void stack_backward(const ModelMats<S>& m, const std::vector<uint32_t>& ids,
                      const std::vector<uint8_t>& mask,
                      const std::vector<uint8_t>& segs,
                      const StackCache<S>& cache, RowMat<S> dx,
                      ModelMats<S>& g) const {
    for (int l = c_.layers - 1; l >= 0; --l) {
      dx = layer_backward(m.layers[l], mask, cache.B, cache.L, cache.layers[l],
                          dx, g.layers[l]);
    }
    RowMat<S> d_emb;
    detail::ln_backward(dx, m.emb_ln_g, cache.emb_ln, d_emb, g.emb_ln_g,
                        g.emb_ln_b);
    const int N = cache.B * cache.L;
    for (int n = 0; n < N; ++n) {
      g.tok_emb.row(ids[n]) += d_emb.row(n);
      g.pos_emb.row(n % cache.L) += d_emb.row(n);
      g.seg_emb.row(segs[n]) += d_emb.row(n);
    }
  }

  // MLM + NSP heads on top of the stack.
  ForwardOutput<S> forward(const ModelMats<S>& m, const PretrainBatch& batch,
                           StackCache<S>& cache, HeadCache<S>& head) const {
    stack_forward(m, batch.ids, batch.mask, batch.segs, batch.B, batch.L, cache);
    const RowMat<S>& hidden = cache.final_hidden();
    const int H = c_.hidden;
    const int K = batch.B * static_cast<int>(kMaxPredictions);

    ForwardOutput<S> out;
    head.gathered.resize(K, H);
    for (int k = 0; k < K; ++k) {
      head.gathered.row(k) = hidden.row(batch.slot_row[k]);
    }
    head.mlm_pre.noalias() = head.gathered * m.mlm_w;
    head.mlm_pre.rowwise() += m.mlm_b.row(0);
    RowMat<S> act = head.mlm_pre.unaryExpr([](S x) { return detail::gelu(x); });
    detail::ln_forward(act, m.mlm_ln_g, m.mlm_ln_b, head.mlm_hidden, head.mlm_ln);
    out.mlm_logits.noalias() = head.mlm_hidden * m.tok_emb.transpose();
    out.mlm_logits.rowwise() += m.mlm_out_bias.row(0);

    head.cls_rows.resize(batch.B, H);
    for (int b = 0; b < batch.B; ++b) {
      head.cls_rows.row(b) = hidden.row(static_cast<Eigen::Index>(b) * batch.L);
    }
    RowMat<S> pre = head.cls_rows * m.nsp_pool_w;
    pre.rowwise() += m.nsp_pool_b.row(0);
    head.pooled = pre.unaryExpr([](S x) { return std::tanh(x); });
    out.nsp_logits.noalias() = head.pooled * m.nsp_cls_w;
    out.nsp_logits.rowwise() += m.nsp_cls_b.row(0);

    // Losses, accumulated in 64-bit.
    head.mlm_probs = out.mlm_logits;
    detail::softmax_rows(head.mlm_probs);
    double total_w = 0, loss = 0, hits = 0;
    for (int k = 0; k < K; ++k) {
      double w = batch.slot_weight[k];
      if (w == 0) continue;
      total_w += w;
      loss -= w * std::log(std::max(
                      static_cast<double>(head.mlm_probs(k, batch.slot_label[k])),
                      1e-300));
      hits += w * (detail::argmax_row(head.mlm_probs.row(k)) ==
                   static_cast<Eigen::Index>(batch.slot_label[k]));
    }
    if (total_w == 0) {
      throw data_error("compute_losses: no weighted MLM slots in batch");
    }
    head.total_weight = total_w;
    out.losses.mlm_loss = loss / total_w;
    out.losses.mlm_acc = hits / total_w;

    head.nsp_probs = out.nsp_logits;
    detail::softmax_rows(head.nsp_probs);
    double nsp_loss = 0, nsp_hits = 0;
    for (int b = 0; b < batch.B; ++b) {
      nsp_loss -= std::log(std::max(
          static_cast<double>(head.nsp_probs(b, batch.nsp_label[b])), 1e-300));
      nsp_hits += detail::argmax_row(head.nsp_probs.row(b)) ==
                  static_cast<Eigen::Index>(batch.nsp_label[b]);
    }
    out.losses.nsp_loss = nsp_loss / batch.B;
    out.losses.nsp_acc = nsp_hits / batch.B;
    return out;
  }

  // Exact gradient of mlm_loss + nsp_loss w.r.t. every tensor.
  ModelMats<S> backward(const ModelMats<S>& m, const PretrainBatch& batch,
                        const StackCache<S>& cache,
                        const HeadCache<S>& head) const {
    ModelMats<S> g = ModelMats<S>::zeros(c_);
    const RowMat<S>& hidden = cache.final_hidden();
    RowMat<S> dx = RowMat<S>::Zero(hidden.rows(), hidden.cols());
    const int K = batch.B * static_cast<int>(kMaxPredictions);

    // MLM head.
    RowMat<S> dlogits = head.mlm_probs;
    for (int k = 0; k < K; ++k) {
      dlogits(k, batch.slot_label[k]) -= S(1);
      dlogits.row(k) *= S(batch.slot_weight[k] / head.total_weight);
    }
    g.tok_emb.noalias() += dlogits.transpose() * head.mlm_hidden;
    g.mlm_out_bias.row(0) += dlogits.colwise().sum();
    RowMat<S> d_hidden2 = dlogits * m.tok_emb;
    RowMat<S> d_act;
    detail::ln_backward(d_hidden2, m.mlm_ln_g, head.mlm_ln, d_act, g.mlm_ln_g,
                        g.mlm_ln_b);
    RowMat<S> d_pre = d_act.cwiseProduct(
        head.mlm_pre.unaryExpr([](S x) { return detail::gelu_grad(x); }));
    g.mlm_w.noalias() += head.gathered.transpose() * d_pre;
    g.mlm_b.row(0) += d_pre.colwise().sum();
    RowMat<S> d_gathered = d_pre * m.mlm_w.transpose();
    for (int k = 0; k < K; ++k) {
      dx.row(batch.slot_row[k]) += d_gathered.row(k);
    }

    // NSP head.
    RowMat<S> d_nsp = head.nsp_probs;
    for (int b = 0; b < batch.B; ++b) {
      d_nsp(b, batch.nsp_label[b]) -= S(1);
    }
    d_nsp /= S(batch.B);
    g.nsp_cls_w.noalias() += head.pooled.transpose() * d_nsp;
    g.nsp_cls_b.row(0) += d_nsp.colwise().sum();
    RowMat<S> d_pooled = d_nsp * m.nsp_cls_w.transpose();
    RowMat<S> d_pool_pre = d_pooled.cwiseProduct(
        (S(1) - head.pooled.array().square()).matrix());
    g.nsp_pool_w.noalias() += head.cls_rows.transpose() * d_pool_pre;
    g.nsp_pool_b.row(0) += d_pool_pre.colwise().sum();
    RowMat<S> d_cls = d_pool_pre * m.nsp_pool_w.transpose();
    for (int b = 0; b < batch.B; ++b) {
      dx.row(static_cast<Eigen::Index>(b) * batch.L) += d_cls.row(b);
    }

    stack_backward(m, batch.ids, batch.mask, batch.segs, cache, std::move(dx), g);
    return g;
  }

  // --- classification path (finetuning) ---

  struct ClassifyOutput {
    RowMat<S> logits;  // B x C
    RowMat<S> probs;
    double loss = 0;
    double acc = 0;
    RowMat<S> cls_rows, pooled;
  };

  struct HeadGrads {
    RowMat<S> pool_w, pool_b, cls_w, cls_b;
  };

  ClassifyOutput classify_forward(const ModelMats<S>& m,
                                  const RowMat<S>& pool_w, const RowMat<S>& pool_b,
                                  const RowMat<S>& cls_w, const RowMat<S>& cls_b,
                                  const ClassifyBatch& batch,
                                  StackCache<S>& cache) const {
    std::vector<uint8_t> segs(batch.ids.size(), 0);
    stack_forward(m, batch.ids, batch.mask, segs, batch.B, batch.L, cache);
    const RowMat<S>& hidden = cache.final_hidden();
    ClassifyOutput out;
    out.cls_rows.resize(batch.B, c_.hidden);
    for (int b = 0; b < batch.B; ++b) {
      out.cls_rows.row(b) = hidden.row(static_cast<Eigen::Index>(b) * batch.L);
    }
    RowMat<S> pre = out.cls_rows * pool_w;
    pre.rowwise() += pool_b.row(0);
    out.pooled = pre.unaryExpr([](S x) { return std::tanh(x); });
    out.logits.noalias() = out.pooled * cls_w;
    out.logits.rowwise() += cls_b.row(0);
    out.probs = out.logits;
    detail::softmax_rows(out.probs);
    for (int b = 0; b < batch.B; ++b) {
      out.loss -= std::log(
          std::max(static_cast<double>(out.probs(b, batch.labels[b])), 1e-300));
      out.acc += detail::argmax_row(out.probs.row(b)) ==
                 static_cast<Eigen::Index>(batch.labels[b]);
    }
    out.loss /= batch.B;
    out.acc /= batch.B;
    return out;
  }

  std::pair<ModelMats<S>, HeadGrads> classify_backward(
      const ModelMats<S>& m, const RowMat<S>& pool_w, const RowMat<S>& cls_w,
      const ClassifyBatch& batch, const StackCache<S>& cache,
      const ClassifyOutput& out) const {
    ModelMats<S> g = ModelMats<S>::zeros(c_);
    HeadGrads hg;
    RowMat<S> d_logits = out.probs;
    for (int b = 0; b < batch.B; ++b) d_logits(b, batch.labels[b]) -= S(1);
    d_logits /= S(batch.B);
    hg.cls_w.noalias() = out.pooled.transpose() * d_logits;
    hg.cls_b = d_logits.colwise().sum();
    RowMat<S> d_pooled = d_logits * cls_w.transpose();
    RowMat<S> d_pre =
        d_pooled.cwiseProduct((S(1) - out.pooled.array().square()).matrix());
    hg.pool_w.noalias() = out.cls_rows.transpose() * d_pre;
    hg.pool_b = d_pre.colwise().sum();
    RowMat<S> d_cls = d_pre * pool_w.transpose();
    const RowMat<S>& hidden = cache.final_hidden();
    RowMat<S> dx = RowMat<S>::Zero(hidden.rows(), hidden.cols());
    for (int b = 0; b < batch.B; ++b) {
      dx.row(static_cast<Eigen::Index>(b) * batch.L) += d_cls.row(b);
    }
    std::vector<uint8_t> segs(batch.ids.size(), 0);
    stack_backward(m, batch.ids, batch.mask, segs, cache, std::move(dx), g);
    return {std::move(g), std::move(hg)};
  }

 private:
  void layer_forward(const typename ModelMats<S>::Layer& l, const RowMat<S>& x,
                     const std::vector<uint8_t>& mask, int B, int L,
                     detail::LayerCache<S>& c) const {
    const int H = c_.hidden, A = c_.heads, dh = c_.head_dim();
    const S scale = S(1) / std::sqrt(S(dh));
    c.input = x;
    c.q.noalias() = x * l.q_w;
    c.q.rowwise() += l.q_b.row(0);
    c.k.noalias() = x * l.k_w;
    c.k.rowwise() += l.k_b.row(0);
    c.v.noalias() = x * l.v_w;
    c.v.rowwise() += l.v_b.row(0);
    c.ctx.resize(x.rows(), H);
    c.probs.assign(static_cast<size_t>(B) * A, RowMat<S>());
    for (int b = 0; b < B; ++b) {
      for (int a = 0; a < A; ++a) {
        auto qb = c.q.block(b * L, a * dh, L, dh);
        auto kb = c.k.block(b * L, a * dh, L, dh);
        auto vb = c.v.block(b * L, a * dh, L, dh);
        RowMat<S> scores = qb * kb.transpose() * scale;
        for (int j = 0; j < L; ++j) {
          if (!mask[b * L + j]) {
            scores.col(j).array() += S(detail::kMaskPenalty);
          }
        }
        detail::softmax_rows(scores);
        // Vectorized exp clamps its argument instead of underflowing, so
        // masked keys come back denormal rather than zero; force exact
        // zeros to keep PAD positions strictly outside the computation.
        for (int j = 0; j < L; ++j) {
          if (!mask[b * L + j]) scores.col(j).setZero();
        }
        c.probs[static_cast<size_t>(b) * A + a] = scores;
        c.ctx.block(b * L, a * dh, L, dh).noalias() = scores * vb;
      }
    }
    RowMat<S> attn_out = c.ctx * l.o_w;
    attn_out.rowwise() += l.o_b.row(0);
    RowMat<S> res1 = x + attn_out;
    detail::ln_forward(res1, l.attn_ln_g, l.attn_ln_b, c.ln1_out, c.ln1);
    c.ff_pre.noalias() = c.ln1_out * l.ff1_w;
    c.ff_pre.rowwise() += l.ff1_b.row(0);
    c.ff_act = c.ff_pre.unaryExpr([](S v) { return detail::gelu(v); });
    RowMat<S> ffn_out = c.ff_act * l.ff2_w;
    ffn_out.rowwise() += l.ff2_b.row(0);
    RowMat<S> res2 = c.ln1_out + ffn_out;
    detail::ln_forward(res2, l.out_ln_g, l.out_ln_b, c.out, c.ln2);
  }

  RowMat<S> layer_backward(const typename ModelMats<S>::Layer& l,
                           const std::vector<uint8_t>& mask, int B, int L,
                           const detail::LayerCache<S>& c, const RowMat<S>& dout,
                           typename ModelMats<S>::Layer& g) const {
    const int H = c_.hidden, A = c_.heads, dh = c_.head_dim();
    const S scale = S(1) / std::sqrt(S(dh));

    RowMat<S> d_res2;
    detail::ln_backward(dout, l.out_ln_g, c.ln2, d_res2, g.out_ln_g, g.out_ln_b);
    RowMat<S> d_ln1_out = d_res2;  // residual branch
    g.ff2_w.noalias() += c.ff_act.transpose() * d_res2;
    g.ff2_b.row(0) += d_res2.colwise().sum();
    RowMat<S> d_act = d_res2 * l.ff2_w.transpose();
    RowMat<S> d_pre = d_act.cwiseProduct(
        c.ff_pre.unaryExpr([](S v) { return detail::gelu_grad(v); }));
    g.ff1_w.noalias() += c.ln1_out.transpose() * d_pre;
    g.ff1_b.row(0) += d_pre.colwise().sum();
    d_ln1_out.noalias() += d_pre * l.ff1_w.transpose();

    RowMat<S> d_res1;
    detail::ln_backward(d_ln1_out, l.attn_ln_g, c.ln1, d_res1, g.attn_ln_g,
                        g.attn_ln_b);
    RowMat<S> dx = d_res1;  // residual branch
    g.o_w.noalias() += c.ctx.transpose() * d_res1;
    g.o_b.row(0) += d_res1.colwise().sum();
    RowMat<S> d_ctx = d_res1 * l.o_w.transpose();

    RowMat<S> dq = RowMat<S>::Zero(c.q.rows(), H);
    RowMat<S> dk = RowMat<S>::Zero(c.q.rows(), H);
    RowMat<S> dv = RowMat<S>::Zero(c.q.rows(), H);
    for (int b = 0; b < B; ++b) {
      for (int a = 0; a < A; ++a) {
        const RowMat<S>& p = c.probs[static_cast<size_t>(b) * A + a];
        auto qb = c.q.block(b * L, a * dh, L, dh);
        auto kb = c.k.block(b * L, a * dh, L, dh);
        auto vb = c.v.block(b * L, a * dh, L, dh);
        auto d_ctxb = d_ctx.block(b * L, a * dh, L, dh);
        RowMat<S> dp = d_ctxb * vb.transpose();
        dv.block(b * L, a * dh, L, dh).noalias() += p.transpose() * d_ctxb;
        // softmax backward, row-wise
        RowMat<S> ds(L, L);
        for (int i = 0; i < L; ++i) {
          S dot = dp.row(i).cwiseProduct(p.row(i)).sum();
          ds.row(i) = p.row(i).cwiseProduct(
              (dp.row(i).array() - dot).matrix());
        }
        dq.block(b * L, a * dh, L, dh).noalias() += ds * kb * scale;
        dk.block(b * L, a * dh, L, dh).noalias() +=
            ds.transpose() * qb * scale;
      }
    }
    (void)mask;
    g.q_w.noalias() += c.input.transpose() * dq;
    g.q_b.row(0) += dq.colwise().sum();
    g.k_w.noalias() += c.input.transpose() * dk;
    g.k_b.row(0) += dk.colwise().sum();
    g.v_w.noalias() += c.input.transpose() * dv;
    g.v_b.row(0) += dv.colwise().sum();
    dx.noalias() += dq * l.q_w.transpose();
    dx.noalias() += dk * l.k_w.transpose();
    dx.noalias() += dv * l.v_w.transpose();
    return dx;
  }

  ModelConfig c_;
};

}  // namespace ctpt
