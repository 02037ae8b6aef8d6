#pragma once

#include <string>
#include <vector>

#include "ctpt/corpus/tweet.hpp"
#include "ctpt/pretrain_data/example.hpp"
#include "ctpt/tokenizer/wordpiece.hpp"
#include "ctpt/util/rng.hpp"

namespace ctpt {

struct SentencePair {
  TokenSequence seg_a;
  TokenSequence seg_b;
  uint8_t nsp_label = kNspIsNext;
};

// One pair per document: segment A is a prefix of the document's
// sentences; with probability 0.5 segment B is the true continuation,
// otherwise it is drawn from a uniformly random different document.
// Documents whose continuation is empty always draw a random B.
// Throws when fewer than two documents are available.
std::vector<SentencePair> pair_sentences(const std::vector<SentenceDoc>& docs,
                                         const Vocabulary& vocab, Rng& rng);

struct MaskOutcome {
  std::vector<uint16_t> positions;  // strictly increasing
  std::vector<uint32_t> labels;     // original ids at those positions
};

// Whole-word masking in place. Words are selected at a 15% rate
// (stochastic rounding, minimum one word) up to kMaxPredictions
// positions; each selected word is replaced as a unit: 80% [MASK],
// 10% a random vocab id, 10% unchanged, the draw made once per word.
MaskOutcome mask_sequence(std::vector<uint32_t>& ids,
                          const std::vector<bool>& word_start,
                          const std::vector<bool>& maskable, Rng& rng,
                          size_t vocab_size);

// Assembles [CLS] A [SEP] B [SEP], truncating whole words from the longer
// segment when over budget, then applies masking.
PretrainExample build_example(const SentencePair& pair, Rng& rng,
                              size_t vocab_size);

struct ShardSet {
  std::vector<std::string> shards;
  std::vector<std::string> validation_shards;
  uint64_t example_count = 0;
  uint64_t validation_count = 0;
  uint64_t seed = 0;
  uint32_t dupe_factor = 0;
  uint64_t vocab_hash = 0;
};

// dupe_factor passes over the corpus, each pass seeded with
// seed + pass index so pairing and masking differ per pass. Documents
// are split 99/1 into train/validation by id hash before generation.
// Writes round-robin shards plus a manifest.json (written atomically,
// last). Deterministic: identical inputs give bytewise identical shards.
ShardSet generate_shards(const std::vector<SentenceDoc>& docs,
                         const Vocabulary& vocab, uint32_t dupe_factor,
                         uint64_t seed, const std::string& out_dir,
                         int num_shards = 4);

ShardSet load_manifest(const std::string& out_dir);

}  // namespace ctpt
