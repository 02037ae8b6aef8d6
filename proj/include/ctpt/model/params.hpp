#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctpt/model/config.hpp"
#include "ctpt/util/rng.hpp"

namespace ctpt {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// All model tensors, templated on scalar so the same structure serves
// float parameters, float/double gradients and Adam moments. The MLM
// output projection is tied to tok_emb; there is no separate tensor.
template <typename S>
struct ModelMats {
  using Mat = RowMat<S>;

  struct Layer {
    Mat q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
    Mat attn_ln_g, attn_ln_b;
    Mat ff1_w, ff1_b, ff2_w, ff2_b;
    Mat out_ln_g, out_ln_b;
  };

  Mat tok_emb, pos_emb, seg_emb;
  Mat emb_ln_g, emb_ln_b;
  std::vector<Layer> layers;
  Mat mlm_w, mlm_b, mlm_ln_g, mlm_ln_b, mlm_out_bias;
  Mat nsp_pool_w, nsp_pool_b, nsp_cls_w, nsp_cls_b;

  static ModelMats zeros(const ModelConfig& c) {
    ModelMats m;
    int H = c.hidden, F = c.ff_dim, V = c.vocab_size, L = c.max_seq;
    auto z = [](int r, int cc) { return Mat::Zero(r, cc); };
    m.tok_emb = z(V, H);
    m.pos_emb = z(L, H);
    m.seg_emb = z(2, H);
    m.emb_ln_g = z(1, H);
    m.emb_ln_b = z(1, H);
    m.layers.resize(c.layers);
    for (auto& l : m.layers) {
      l.q_w = z(H, H); l.q_b = z(1, H);
      l.k_w = z(H, H); l.k_b = z(1, H);
      l.v_w = z(H, H); l.v_b = z(1, H);
      l.o_w = z(H, H); l.o_b = z(1, H);
      l.attn_ln_g = z(1, H); l.attn_ln_b = z(1, H);
      l.ff1_w = z(H, F); l.ff1_b = z(1, F);
      l.ff2_w = z(F, H); l.ff2_b = z(1, H);
      l.out_ln_g = z(1, H); l.out_ln_b = z(1, H);
    }
    m.mlm_w = z(H, H); m.mlm_b = z(1, H);
    m.mlm_ln_g = z(1, H); m.mlm_ln_b = z(1, H);
    m.mlm_out_bias = z(1, V);
    m.nsp_pool_w = z(H, H); m.nsp_pool_b = z(1, H);
    m.nsp_cls_w = z(H, 2); m.nsp_cls_b = z(1, 2);
    return m;
  }

  template <typename T>
  ModelMats<T> cast() const {
    ModelMats<T> out;
    auto cv = [](const Mat& a) { return a.template cast<T>().eval(); };
    out.tok_emb = cv(tok_emb);
    out.pos_emb = cv(pos_emb);
    out.seg_emb = cv(seg_emb);
    out.emb_ln_g = cv(emb_ln_g);
    out.emb_ln_b = cv(emb_ln_b);
    out.layers.resize(layers.size());
    for (size_t i = 0; i < layers.size(); ++i) {
      const Layer& l = layers[i];
      auto& o = out.layers[i];
      o.q_w = cv(l.q_w); o.q_b = cv(l.q_b);
      o.k_w = cv(l.k_w); o.k_b = cv(l.k_b);
      o.v_w = cv(l.v_w); o.v_b = cv(l.v_b);
      o.o_w = cv(l.o_w); o.o_b = cv(l.o_b);
      o.attn_ln_g = cv(l.attn_ln_g); o.attn_ln_b = cv(l.attn_ln_b);
      o.ff1_w = cv(l.ff1_w); o.ff1_b = cv(l.ff1_b);
      o.ff2_w = cv(l.ff2_w); o.ff2_b = cv(l.ff2_b);
      o.out_ln_g = cv(l.out_ln_g); o.out_ln_b = cv(l.out_ln_b);
    }
    out.mlm_w = cv(mlm_w); out.mlm_b = cv(mlm_b);
    out.mlm_ln_g = cv(mlm_ln_g); out.mlm_ln_b = cv(mlm_ln_b);
    out.mlm_out_bias = cv(mlm_out_bias);
    out.nsp_pool_w = cv(nsp_pool_w); out.nsp_pool_b = cv(nsp_pool_b);
    out.nsp_cls_w = cv(nsp_cls_w); out.nsp_cls_b = cv(nsp_cls_b);
    return out;
  }
};

// Deterministic enumeration of (name, tensor) pairs; the order defines
// the init stream, the checkpoint layout and the Adam pairing.
template <typename S>
std::vector<std::pair<std::string, RowMat<S>*>> tensor_list(ModelMats<S>& m) {
  std::vector<std::pair<std::string, RowMat<S>*>> out;
  out.emplace_back("embeddings/token", &m.tok_emb);
  out.emplace_back("embeddings/position", &m.pos_emb);
  out.emplace_back("embeddings/segment", &m.seg_emb);
  out.emplace_back("embeddings/ln_gamma", &m.emb_ln_g);
  out.emplace_back("embeddings/ln_beta", &m.emb_ln_b);
  for (size_t i = 0; i < m.layers.size(); ++i) {
    auto& l = m.layers[i];
    std::string p = "layer" + std::to_string(i) + "/";
    out.emplace_back(p + "q_w", &l.q_w);
    out.emplace_back(p + "q_b", &l.q_b);
    out.emplace_back(p + "k_w", &l.k_w);
    out.emplace_back(p + "k_b", &l.k_b);
    out.emplace_back(p + "v_w", &l.v_w);
    out.emplace_back(p + "v_b", &l.v_b);
    out.emplace_back(p + "o_w", &l.o_w);
    out.emplace_back(p + "o_b", &l.o_b);
    out.emplace_back(p + "attn_ln_gamma", &l.attn_ln_g);
    out.emplace_back(p + "attn_ln_beta", &l.attn_ln_b);
    out.emplace_back(p + "ff1_w", &l.ff1_w);
    out.emplace_back(p + "ff1_b", &l.ff1_b);
    out.emplace_back(p + "ff2_w", &l.ff2_w);
    out.emplace_back(p + "ff2_b", &l.ff2_b);
    out.emplace_back(p + "out_ln_gamma", &l.out_ln_g);
    out.emplace_back(p + "out_ln_beta", &l.out_ln_b);
  }
  out.emplace_back("mlm/transform_w", &m.mlm_w);
  out.emplace_back("mlm/transform_b", &m.mlm_b);
  out.emplace_back("mlm/ln_gamma", &m.mlm_ln_g);
  out.emplace_back("mlm/ln_beta", &m.mlm_ln_b);
  out.emplace_back("mlm/output_bias", &m.mlm_out_bias);
  out.emplace_back("nsp/pooler_w", &m.nsp_pool_w);
  out.emplace_back("nsp/pooler_b", &m.nsp_pool_b);
  out.emplace_back("nsp/classifier_w", &m.nsp_cls_w);
  out.emplace_back("nsp/classifier_b", &m.nsp_cls_b);
  return out;
}

// Canonical trained parameters: float storage, whatever the compute
// precision. Ensures checkpoints round-trip bit-exactly.
struct Parameters {
  ModelConfig config;
  ModelMats<float> mats;
};

// Truncated normal (sigma 0.02, clipped at 2 sigma) for weights and
// embeddings, zeros for biases, ones for layer-norm scales. Deterministic
// given config.seed.
Parameters init_params(const ModelConfig& config);

// Finetuning head: CLS pooler into a C-way softmax. The pooler starts
// from the pretrained NSP pooler weights.
struct ClassifierHead {
  int num_classes = 0;
  RowMat<float> pool_w, pool_b, cls_w, cls_b;
};

ClassifierHead init_classifier(const Parameters& params, int num_classes,
                               uint64_t seed);

}  // namespace ctpt
