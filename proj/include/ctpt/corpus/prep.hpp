#pragma once

#include <string>
#include <vector>

#include "ctpt/corpus/emoji.hpp"
#include "ctpt/corpus/tweet.hpp"

namespace ctpt {

struct PrepStats {
  size_t read = 0;
  size_t rejected = 0;
  size_t dropped_retweets = 0;
  size_t dropped_exact = 0;
  size_t dropped_near = 0;
  size_t written = 0;
};

// Full preprocessing stage: JSONL tweets in, JSONL sentence docs out,
// rejected records (with reason) to a side log. Single streaming pass;
// dedup keeps the first occurrence.
PrepStats run_prep(const std::string& input_path, const std::string& output_path,
                   const std::string& reject_path, const EmojiTable& emoji,
                   double dedup_threshold);

// Reads a sentence-doc JSONL file as written by run_prep.
std::vector<SentenceDoc> load_sentence_docs(const std::string& path);

}  // namespace ctpt
