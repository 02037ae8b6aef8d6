#include "ctpt/pretrain_data/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>

#include <nlohmann/json.hpp>

#include "ctpt/pretrain_data/shard.hpp"
#include "ctpt/util/error.hpp"
#include "ctpt/util/hash.hpp"

namespace ctpt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr size_t kPairBudget = kSeqLen - 3;  // [CLS], two [SEP]

void append_seq(TokenSequence& dst, const TokenSequence& src) {
  dst.ids.insert(dst.ids.end(), src.ids.begin(), src.ids.end());
  dst.word_start.insert(dst.word_start.end(), src.word_start.begin(),
                        src.word_start.end());
}

// Removes the trailing word (continuation pieces plus their start).
void pop_word(TokenSequence& seq) {
  while (!seq.ids.empty()) {
    bool was_start = seq.word_start.back();
    seq.ids.pop_back();
    seq.word_start.pop_back();
    if (was_start) break;
  }
}

}  // namespace

std::vector<SentencePair> pair_sentences(const std::vector<SentenceDoc>& docs,
                                         const Vocabulary& vocab, Rng& rng) {
  // Tokenize once; drop sentences/documents that encode to nothing.
  std::vector<std::vector<TokenSequence>> tokenized;
  for (const auto& doc : docs) {
    std::vector<TokenSequence> sents;
    for (const auto& s : doc.sentences) {
      TokenSequence seq = encode(s, vocab);
      if (!seq.ids.empty()) sents.push_back(std::move(seq));
    }
    if (!sents.empty()) tokenized.push_back(std::move(sents));
  }
  if (tokenized.size() < 2) {
    throw data_error("pair_sentences: need at least 2 non-empty documents, got " +
                     std::to_string(tokenized.size()));
  }

  std::vector<SentencePair> pairs;
  for (size_t i = 0; i < tokenized.size(); ++i) {
    const auto& sents = tokenized[i];
    // Chunk = leading sentences until the token budget is reached.
    size_t chunk = 0;
    size_t total = 0;
    while (chunk < sents.size() && total < kPairBudget) {
      total += sents[chunk].ids.size();
      ++chunk;
    }
    size_t a_end = chunk >= 2 ? 1 + rng.uniform_index(chunk - 1) : 1;

    SentencePair pair;
    for (size_t k = 0; k < a_end; ++k) append_seq(pair.seg_a, sents[k]);

    bool want_next = rng.uniform() < 0.5;
    if (want_next && a_end < chunk) {
      pair.nsp_label = kNspIsNext;
      for (size_t k = a_end; k < chunk; ++k) append_seq(pair.seg_b, sents[k]);
    } else {
      pair.nsp_label = kNspRandom;
      size_t j = rng.uniform_index(tokenized.size() - 1);
      if (j >= i) ++j;
      const auto& other = tokenized[j];
      size_t start = rng.uniform_index(other.size());
      size_t used = pair.seg_a.ids.size();
      for (size_t k = start; k < other.size() && used < kPairBudget; ++k) {
        append_seq(pair.seg_b, other[k]);
        used += other[k].ids.size();
      }
    }
    if (pair.seg_b.ids.empty()) continue;  // degenerate, skip
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

MaskOutcome mask_sequence(std::vector<uint32_t>& ids,
                          const std::vector<bool>& word_start,
                          const std::vector<bool>& maskable, Rng& rng,
                          size_t vocab_size) {
  struct WordSpan {
    size_t start;
    size_t len;
  };
  std::vector<WordSpan> words;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!maskable[i]) continue;
    if (word_start[i] || words.empty() ||
        words.back().start + words.back().len != i) {
      words.push_back({i, 1});
    } else {
      ++words.back().len;
    }
  }

  MaskOutcome out;
  if (words.empty()) return out;

  // 15% of words, stochastically rounded so the rate is exact in
  // expectation, with a floor of one word per sequence.
  double target_f = 0.15 * static_cast<double>(words.size());
  size_t target = static_cast<size_t>(target_f);
  if (rng.uniform() < target_f - static_cast<double>(target)) ++target;
  target = std::max<size_t>(1, target);

  std::vector<size_t> order(words.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::pair<uint16_t, uint32_t>> picked;
  size_t selected = 0;
  for (size_t wi : order) {
    if (selected >= target) break;
    const WordSpan& w = words[wi];
    if (picked.size() + w.len > kMaxPredictions) continue;
    ++selected;
    double r = rng.uniform();
    for (size_t p = w.start; p < w.start + w.len; ++p) {
      picked.emplace_back(static_cast<uint16_t>(p), ids[p]);
      if (r < 0.8) {
        ids[p] = kMaskId;
      } else if (r < 0.9) {
        ids[p] = static_cast<uint32_t>(rng.uniform_index(vocab_size));
      }
      // else: left unchanged
    }
  }
  std::sort(picked.begin(), picked.end());
  for (auto& [pos, label] : picked) {
    out.positions.push_back(pos);
    out.labels.push_back(label);
  }
  return out;
}

PretrainExample build_example(const SentencePair& pair, Rng& rng,
                              size_t vocab_size) {
  TokenSequence a = pair.seg_a;
  TokenSequence b = pair.seg_b;
  while (a.ids.size() + b.ids.size() > kPairBudget) {
    TokenSequence& longer = a.ids.size() >= b.ids.size() ? a : b;
    TokenSequence& shorter = a.ids.size() >= b.ids.size() ? b : a;
    if (longer.ids.size() > 1 || shorter.ids.empty()) {
      pop_word(longer);
    } else {
      pop_word(shorter);
    }
  }

  std::vector<uint32_t> ids;
  std::vector<bool> word_start, maskable;
  auto push = [&](uint32_t id, bool ws, bool mk) {
    ids.push_back(id);
    word_start.push_back(ws);
    maskable.push_back(mk);
  };
  push(kClsId, false, false);
  for (size_t k = 0; k < a.ids.size(); ++k) push(a.ids[k], a.word_start[k], true);
  size_t first_sep = ids.size();
  push(kSepId, false, false);
  for (size_t k = 0; k < b.ids.size(); ++k) push(b.ids[k], b.word_start[k], true);
  push(kSepId, false, false);

  MaskOutcome masked = mask_sequence(ids, word_start, maskable, rng, vocab_size);

  PretrainExample ex;
  for (size_t i = 0; i < ids.size(); ++i) {
    ex.input_ids[i] = ids[i];
    ex.input_mask[i] = 1;
    ex.segment_ids[i] = i <= first_sep ? 0 : 1;
  }
  ex.num_predictions = static_cast<uint8_t>(masked.positions.size());
  for (size_t k = 0; k < masked.positions.size(); ++k) {
    ex.masked_positions[k] = masked.positions[k];
    ex.masked_label_ids[k] = masked.labels[k];
    ex.masked_weights[k] = 1.0f;
  }
  ex.nsp_label = pair.nsp_label;
  return ex;
}

namespace {

std::string shard_name(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%03d.shard", prefix, i);
  return buf;
}

uint64_t write_passes(const std::vector<SentenceDoc>& docs,
                      const Vocabulary& vocab, uint32_t dupe_factor,
                      const std::string& out_dir,
                      const std::vector<std::string>& names,
                      std::function<uint64_t(uint32_t)> pass_seed) {
  std::vector<std::unique_ptr<ShardWriter>> writers;
  for (const auto& n : names) {
    writers.push_back(std::make_unique<ShardWriter>(out_dir + "/" + n));
  }
  uint64_t count = 0;
  for (uint32_t pass = 0; pass < dupe_factor; ++pass) {
    Rng rng(pass_seed(pass));
    auto pairs = pair_sentences(docs, vocab, rng);
    for (const auto& pair : pairs) {
      PretrainExample ex = build_example(pair, rng, vocab.size());
      writers[count % writers.size()]->write(ex);
      ++count;
    }
  }
  for (auto& w : writers) w->close();
  return count;
}

}  // namespace

ShardSet generate_shards(const std::vector<SentenceDoc>& docs,
                         const Vocabulary& vocab, uint32_t dupe_factor,
                         uint64_t seed, const std::string& out_dir,
                         int num_shards) {
  if (dupe_factor < 1) throw data_error("dupe_factor must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  {
    std::ofstream probe(out_dir + "/.probe");
    if (!probe) throw data_error("generate_shards: " + out_dir + " not writable");
  }
  fs::remove(out_dir + "/.probe", ec);

  // 1% of documents held out by id hash, fixed before generation.
  std::vector<SentenceDoc> train, val;
  for (const auto& d : docs) {
    (fnv1a64(d.id) % 100 == 0 ? val : train).push_back(d);
  }

  ShardSet set;
  set.seed = seed;
  set.dupe_factor = dupe_factor;
  set.vocab_hash = vocab.content_hash();
  for (int i = 0; i < num_shards; ++i) set.shards.push_back(shard_name("train", i));
  set.example_count =
      write_passes(train, vocab, dupe_factor, out_dir, set.shards,
                   [seed](uint32_t pass) { return seed + pass; });
  if (val.size() >= 2) {
    set.validation_shards.push_back(shard_name("val", 0));
    set.validation_count =
        write_passes(val, vocab, dupe_factor, out_dir, set.validation_shards,
                     [seed](uint32_t pass) { return mix64(seed + pass) | 1; });
  }

  json manifest{{"shards", set.shards},
                {"validation_shards", set.validation_shards},
                {"example_count", set.example_count},
                {"validation_count", set.validation_count},
                {"seed", set.seed},
                {"dupe_factor", set.dupe_factor},
                {"vocab_hash", set.vocab_hash}};
  std::string tmp = out_dir + "/manifest.json.tmp";
  {
    std::ofstream out(tmp);
    out << manifest.dump(2) << "\n";
  }
  fs::rename(tmp, out_dir + "/manifest.json");
  return set;
}

ShardSet load_manifest(const std::string& out_dir) {
  std::ifstream in(out_dir + "/manifest.json");
  if (!in) throw data_error("no manifest.json in " + out_dir);
  json j = json::parse(in);
  ShardSet set;
  set.shards = j.at("shards").get<std::vector<std::string>>();
  set.validation_shards =
      j.at("validation_shards").get<std::vector<std::string>>();
  set.example_count = j.at("example_count").get<uint64_t>();
  set.validation_count = j.at("validation_count").get<uint64_t>();
  set.seed = j.at("seed").get<uint64_t>();
  set.dupe_factor = j.at("dupe_factor").get<uint32_t>();
  set.vocab_hash = j.at("vocab_hash").get<uint64_t>();
  return set;
}

}  // namespace ctpt
