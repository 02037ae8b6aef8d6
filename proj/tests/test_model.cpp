#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ctpt/model/checkpoint.hpp"
#include "ctpt/model/encoder.hpp"
#include "ctpt/model/gradcheck.hpp"
#include "ctpt/tokenizer/vocabulary.hpp"
#include "ctpt/util/rng.hpp"

using namespace ctpt;
namespace fs = std::filesystem;

namespace {

ModelConfig toy_config(int vocab = 64) {
  ModelConfig c;
  c.layers = 2;
  c.hidden = 32;
  c.heads = 4;
  c.ff_dim = 64;
  c.vocab_size = vocab;
  c.seed = 5;
  return c;
}

// A well-formed example with n_tokens real tokens and n_pred predictions.
PretrainExample toy_example(Rng& rng, int vocab, int n_tokens = 24,
                            int n_pred = 4) {
  PretrainExample ex;
  ex.input_ids[0] = kClsId;
  int sep1 = n_tokens / 2, sep2 = n_tokens - 1;
  for (int t = 1; t < n_tokens; ++t) {
    if (t == sep1 || t == sep2) {
      ex.input_ids[t] = kSepId;
    } else {
      ex.input_ids[t] = 5 + static_cast<uint32_t>(rng.uniform_index(vocab - 5));
    }
    ex.segment_ids[t] = t > sep1 ? 1 : 0;
  }
  for (int t = 0; t < n_tokens; ++t) ex.input_mask[t] = 1;
  ex.num_predictions = static_cast<uint8_t>(n_pred);
  for (int k = 0; k < n_pred; ++k) {
    uint16_t pos = static_cast<uint16_t>(2 + 2 * k);
    ex.masked_positions[k] = pos;
    ex.masked_label_ids[k] = ex.input_ids[pos];
    ex.masked_weights[k] = 1.0f;
    ex.input_ids[pos] = kMaskId;
  }
  ex.nsp_label = rng.uniform() < 0.5 ? kNspIsNext : kNspRandom;
  return ex;
}

bool bit_equal(const ModelMats<float>& a, const ModelMats<float>& b) {
  auto la = tensor_list(const_cast<ModelMats<float>&>(a));
  auto lb = tensor_list(const_cast<ModelMats<float>&>(b));
  if (la.size() != lb.size()) return false;
  for (size_t i = 0; i < la.size(); ++i) {
    const auto& ma = *la[i].second;
    const auto& mb = *lb[i].second;
    if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) return false;
    if (std::memcmp(ma.data(), mb.data(), sizeof(float) * ma.size()) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config: invariants are validated by name") {
  ModelConfig c = toy_config();
  c.hidden = 30;  // not divisible by 4 heads
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("divisible"), Error);
  c = toy_config();
  c.vocab_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = toy_config();
  CHECK(c.head_dim() == 8);
}

TEST_CASE("init: deterministic, correct shapes, LN scales at one") {
  ModelConfig c = toy_config();
  Parameters a = init_params(c);
  Parameters b = init_params(c);
  CHECK(bit_equal(a.mats, b.mats));
  CHECK(a.mats.tok_emb.rows() == 64);
  CHECK(a.mats.tok_emb.cols() == 32);
  CHECK(a.mats.layers.size() == 2);
  CHECK(a.mats.emb_ln_g(0, 0) == 1.0f);
  CHECK(a.mats.layers[0].ff1_b.isZero());
  // Truncated normal: everything within 2 sigma.
  CHECK(a.mats.tok_emb.cwiseAbs().maxCoeff() <= 0.04f + 1e-7f);
  ModelConfig c2 = c;
  c2.seed = 6;
  CHECK_FALSE(bit_equal(init_params(c2).mats, a.mats));
}

TEST_CASE("forward: shape contract and finite outputs") {
  ModelConfig c = toy_config(100);
  Parameters p = init_params(c);
  Encoder<float> enc(c);
  Rng rng(2);
  std::vector<PretrainExample> exs = {toy_example(rng, 100),
                                      toy_example(rng, 100)};
  PretrainBatch batch = make_batch(exs, c);
  StackCache<float> cache;
  HeadCache<float> head;
  auto out = enc.forward(p.mats, batch, cache, head);
  CHECK(out.mlm_logits.rows() == 2 * static_cast<int>(kMaxPredictions));
  CHECK(out.mlm_logits.cols() == 100);
  CHECK(out.nsp_logits.rows() == 2);
  CHECK(out.nsp_logits.cols() == 2);
  CHECK(out.mlm_logits.allFinite());
  CHECK(out.losses.mlm_loss > 0);
  CHECK(out.losses.nsp_loss > 0);
  CHECK(out.losses.mlm_acc >= 0);
  CHECK(out.losses.nsp_acc <= 1);
}

TEST_CASE("forward: id out of range names batch and position") {
  ModelConfig c = toy_config(50);
  Rng rng(2);
  std::vector<PretrainExample> exs = {toy_example(rng, 50)};
  exs[0].input_ids[3] = 50;
  CHECK_THROWS_WITH_AS(make_batch(exs, c), doctest::Contains("position 3"),
                       Error);
}

TEST_CASE("losses: zero parameters give uniform predictions") {
  // All-zero parameters push identical (zero) logits everywhere:
  // MLM loss = ln(V), NSP loss = ln 2, exactly the uniform entropies.
  ModelConfig c = toy_config(100);
  Parameters p{c, ModelMats<float>::zeros(c)};
  Encoder<float> enc(c);
  Rng rng(4);
  std::vector<PretrainExample> exs = {toy_example(rng, 100)};
  PretrainBatch batch = make_batch(exs, c);
  StackCache<float> cache;
  HeadCache<float> head;
  auto out = enc.forward(p.mats, batch, cache, head);
  CHECK(out.losses.mlm_loss == doctest::Approx(std::log(100.0)).epsilon(1e-5));
  CHECK(out.losses.nsp_loss == doctest::Approx(std::log(2.0)).epsilon(1e-5));
}

TEST_CASE("losses: a dominant correct logit drives loss to zero") {
  ModelConfig c = toy_config(50);
  Parameters p{c, ModelMats<float>::zeros(c)};
  Encoder<float> enc(c);
  Rng rng(4);
  std::vector<PretrainExample> exs = {toy_example(rng, 50)};
  exs[0].nsp_label = kNspIsNext;
  // Bias the NSP classifier hard toward class 0.
  p.mats.nsp_cls_b(0, 0) = 50.0f;
  PretrainBatch batch = make_batch(exs, c);
  StackCache<float> cache;
  HeadCache<float> head;
  auto out = enc.forward(p.mats, batch, cache, head);
  CHECK(out.losses.nsp_loss == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(out.losses.nsp_acc == 1.0);
}

TEST_CASE("losses: all-zero prediction weights is an error") {
  ModelConfig c = toy_config(50);
  Parameters p = init_params(c);
  Encoder<float> enc(c);
  Rng rng(4);
  std::vector<PretrainExample> exs = {toy_example(rng, 50, 24, 0)};
  PretrainBatch batch = make_batch(exs, c);
  StackCache<float> cache;
  HeadCache<float> head;
  CHECK_THROWS_AS(enc.forward(p.mats, batch, cache, head), Error);
}

TEST_CASE("forward: permuting examples permutes outputs") {
  ModelConfig c = toy_config(80);
  Parameters p = init_params(c);
  Encoder<float> enc(c);
  Rng rng(6);
  std::vector<PretrainExample> ab = {toy_example(rng, 80), toy_example(rng, 80)};
  std::vector<PretrainExample> ba = {ab[1], ab[0]};
  StackCache<float> c1, c2;
  HeadCache<float> h1, h2;
  auto o1 = enc.forward(p.mats, make_batch(ab, c), c1, h1);
  auto o2 = enc.forward(p.mats, make_batch(ba, c), c2, h2);
  CHECK(o1.nsp_logits.row(0) == o2.nsp_logits.row(1));
  CHECK(o1.nsp_logits.row(1) == o2.nsp_logits.row(0));
  const int M = static_cast<int>(kMaxPredictions);
  CHECK(o1.mlm_logits.block(0, 0, M, 80) == o2.mlm_logits.block(M, 0, M, 80));
}

TEST_CASE("forward: PAD positions cannot influence logits") {
  ModelConfig c = toy_config(80);
  Parameters p = init_params(c);
  Encoder<float> enc(c);
  Rng rng(8);
  std::vector<PretrainExample> exs = {toy_example(rng, 80, 20)};
  StackCache<float> c1, c2;
  HeadCache<float> h1, h2;
  auto base = enc.forward(p.mats, make_batch(exs, c), c1, h1);
  // Change every PAD id to an arbitrary in-range token: the ids feed the
  // embedding lookup, so this perturbs exactly the PAD-row embeddings.
  for (size_t t = 0; t < kSeqLen; ++t) {
    if (!exs[0].input_mask[t]) exs[0].input_ids[t] = 7;
  }
  auto pert = enc.forward(p.mats, make_batch(exs, c), c2, h2);
  CHECK((base.mlm_logits - pert.mlm_logits).cwiseAbs().maxCoeff() <= 1e-6f);
  CHECK((base.nsp_logits - pert.nsp_logits).cwiseAbs().maxCoeff() <= 1e-6f);
}

TEST_CASE("attention: softmax rows sum to one") {
  ModelConfig c = toy_config(80);
  Parameters p = init_params(c);
  Encoder<float> enc(c);
  Rng rng(10);
  std::vector<PretrainExample> exs = {toy_example(rng, 80)};
  StackCache<float> cache;
  HeadCache<float> head;
  enc.forward(p.mats, make_batch(exs, c), cache, head);
  for (const auto& layer : cache.layers) {
    for (const auto& probs : layer.probs) {
      for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        CHECK(probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }
  for (Eigen::Index i = 0; i < head.mlm_probs.rows(); ++i) {
    CHECK(head.mlm_probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("gradients: PAD embedding rows receive zero gradient") {
  ModelConfig c = toy_config(80);
  Parameters p = init_params(c);
  Encoder<float> enc(c);
  Rng rng(12);
  std::vector<PretrainExample> exs = {toy_example(rng, 80, 16)};
  // Point all PAD ids at token 79, which appears nowhere else.
  for (size_t t = 16; t < kSeqLen; ++t) exs[0].input_ids[t] = 79;
  PretrainBatch batch = make_batch(exs, c);
  StackCache<float> cache;
  HeadCache<float> head;
  enc.forward(p.mats, batch, cache, head);
  ModelMats<float> g = enc.backward(p.mats, batch, cache, head);
  // Positions 16..95 are PAD: their embedding rows get no signal. (Token
  // embedding rows are excluded here: the tied MLM output projection
  // legitimately reaches every vocab row.)
  for (size_t t = 16; t < kSeqLen; ++t) {
    CHECK(g.pos_emb.row(static_cast<Eigen::Index>(t)).cwiseAbs().maxCoeff() ==
          0.0f);
  }
}

TEST_CASE("grad check: toy config passes at tol 1e-3") {
  ModelConfig c = toy_config(48);
  Parameters p = init_params(c);
  Rng rng(14);
  std::vector<PretrainExample> exs = {toy_example(rng, 48, 20, 3),
                                      toy_example(rng, 48, 12, 2)};
  auto report = grad_check(p, exs, 1e-3, 1e-3, 20, 77);
  for (const auto& t : report.tensors) {
    CAPTURE(t.name);
    // 20 sampled coordinates, or the whole tensor when it is smaller.
    CHECK(t.coords_checked >= 2);
    CHECK(t.worst_rel_err <= 1e-3);
  }
  CHECK(report.passed);
}

TEST_CASE("grad check: refuses non-toy configs") {
  ModelConfig c = toy_config(48);
  c.layers = 3;
  Parameters p = init_params(c);
  Rng rng(14);
  std::vector<PretrainExample> exs = {toy_example(rng, 48)};
  CHECK_THROWS_AS(grad_check(p, exs, 1e-3, 1e-3), Error);
}

TEST_CASE("grad check: exact equality is not expected (tol 0 fails)") {
  ModelConfig c = toy_config(48);
  Parameters p = init_params(c);
  Rng rng(16);
  std::vector<PretrainExample> exs = {toy_example(rng, 48)};
  auto report = grad_check(p, exs, 1e-3, 0.0, 4, 77);
  CHECK_FALSE(report.passed);
}

TEST_CASE("finite differences recover a linear function to 1e-6") {
  // Central differences on f(w) = a*w are exact up to rounding; this
  // pins the harness arithmetic itself.
  const double a = 0.731;
  auto f = [&](double w) { return a * w; };
  double h = 1e-3, w0 = 0.2;
  double fd = (f(w0 + h) - f(w0 - h)) / (2 * h);
  double rel = std::fabs(fd - a) / std::max(1e-8, std::fabs(fd) + std::fabs(a));
  CHECK(rel <= 1e-6);
}

TEST_CASE("checkpoint: save/load/save round trip is byte-identical") {
  ModelConfig c = toy_config(60);
  Parameters p = init_params(c);
  OptimizerState opt = OptimizerState::zeros(c);
  opt.step = 123;
  opt.m.tok_emb.setConstant(0.25f);
  fs::path dir = fs::temp_directory_path() / "ctpt_ckpt_test";
  fs::create_directories(dir);
  std::string p1 = (dir / "a.ckpt").string(), p2 = (dir / "b.ckpt").string();
  save_checkpoint({p, opt, 456}, p1);
  Checkpoint loaded = load_checkpoint(p1, &c);
  CHECK(loaded.step == 456);
  CHECK(loaded.opt.step == 123);
  CHECK(bit_equal(loaded.params.mats, p.mats));
  CHECK(bit_equal(loaded.opt.m, opt.m));
  save_checkpoint(loaded, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)),
                 std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)),
                 std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: wrong expected config is a shape error") {
  ModelConfig c = toy_config(60);
  Parameters p = init_params(c);
  fs::path dir = fs::temp_directory_path() / "ctpt_ckpt_cfg";
  fs::create_directories(dir);
  std::string path = (dir / "c.ckpt").string();
  save_checkpoint({p, OptimizerState::zeros(c), 0}, path);
  ModelConfig wrong = c;
  wrong.vocab_size = 61;
  CHECK_THROWS_AS(load_checkpoint(path, &wrong), Error);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: loaded parameters behave identically") {
  ModelConfig c = toy_config(60);
  Parameters p = init_params(c);
  fs::path dir = fs::temp_directory_path() / "ctpt_ckpt_fwd";
  fs::create_directories(dir);
  std::string path = (dir / "d.ckpt").string();
  save_checkpoint({p, OptimizerState::zeros(c), 0}, path);
  Checkpoint loaded = load_checkpoint(path);
  Encoder<float> enc(c);
  Rng rng(18);
  std::vector<PretrainExample> exs = {toy_example(rng, 60)};
  PretrainBatch batch = make_batch(exs, c);
  StackCache<float> c1, c2;
  HeadCache<float> h1, h2;
  auto o1 = enc.forward(p.mats, batch, c1, h1);
  auto o2 = enc.forward(loaded.params.mats, batch, c2, h2);
  CHECK(o1.mlm_logits == o2.mlm_logits);
  CHECK(o1.nsp_logits == o2.nsp_logits);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: truncation is a structured error") {
  ModelConfig c = toy_config(60);
  Parameters p = init_params(c);
  fs::path dir = fs::temp_directory_path() / "ctpt_ckpt_trunc";
  fs::create_directories(dir);
  std::string path = (dir / "t.ckpt").string();
  save_checkpoint({p, OptimizerState::zeros(c), 0}, path);
  fs::resize_file(path, fs::file_size(path) / 2);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  fs::remove_all(dir);
}
