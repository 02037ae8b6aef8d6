#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ctpt/corpus/tweet.hpp"

namespace ctpt {

inline constexpr uint32_t kPadId = 0;
inline constexpr uint32_t kUnkId = 1;
inline constexpr uint32_t kClsId = 2;
inline constexpr uint32_t kSepId = 3;
inline constexpr uint32_t kMaskId = 4;
inline constexpr size_t kNumSpecials = 5;
inline constexpr size_t kMaxVocabSize = 30000;

class Vocabulary {
 public:
  // Specials at ids 0..4, then injected whole tokens, then the rest.
  explicit Vocabulary(std::vector<std::string> injected_whole_tokens = {
                          kUserToken, kUrlToken});

  uint32_t add(const std::string& token);  // no-op if present, returns id
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  // -1 when absent.
  int64_t id_of(const std::string& token) const;
  const std::string& token_of(uint32_t id) const;
  size_t size() const { return tokens_.size(); }
  bool is_special(uint32_t id) const { return id < kNumSpecials; }
  bool is_injected(const std::string& token) const {
    return injected_.count(token) > 0;
  }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Set when build_vocab could not reach the requested size.
  bool undersized_warning = false;

  void save(const std::string& path) const;  // one token per line
  static Vocabulary load(const std::string& path,
                         std::vector<std::string> injected_whole_tokens = {
                             kUserToken, kUrlToken});

  // Content hash over the token list, for manifests.
  uint64_t content_hash() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, uint32_t> index_;
  std::unordered_set<std::string> injected_;
};

// Greedy frequency-based WordPiece induction. Starts from the characters
// observed in the corpus (word-initial form and "##" continuation form),
// then repeatedly merges the pair with the highest score
// pair_freq / (freq_left * freq_right) until the vocabulary reaches
// target_size or no pair occurs at least twice. Ties break on the
// lexicographically smallest merged token, making the result independent
// of document order.
Vocabulary build_vocab(const std::vector<SentenceDoc>& docs, size_t target_size,
                       std::vector<std::string> injected_whole_tokens = {
                           kUserToken, kUrlToken});

}  // namespace ctpt
