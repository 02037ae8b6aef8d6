#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctpt/tokenizer/vocabulary.hpp"

namespace ctpt {

struct TokenSequence {
  std::vector<uint32_t> ids;
  std::vector<bool> word_start;  // true at the first subword of each word
};

inline constexpr size_t kMaxWordChars = 100;  // longer words become [UNK]

// Greedy longest-match-first WordPiece encoding over whitespace-split
// words. Injected whole tokens always emit a single id; words with no
// decomposition fall back to a single [UNK].
TokenSequence encode(const std::string& text, const Vocabulary& vocab);

// Inverse for in-vocab text: strips specials, joins "##" continuations.
// Throws on an out-of-range id, naming the offending position.
std::string decode(const std::vector<uint32_t>& ids, const Vocabulary& vocab);

}  // namespace ctpt
