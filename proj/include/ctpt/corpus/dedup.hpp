#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ctpt/corpus/tweet.hpp"

namespace ctpt {

// Word 3-gram shingles, hashed. Tweets with fewer than 3 words hash the
// whole text as a single shingle.
std::unordered_set<uint64_t> shingle_hashes(const std::string& text, int n = 3);

double jaccard(const std::unordered_set<uint64_t>& a,
               const std::unordered_set<uint64_t>& b);

// Streaming first-occurrence deduplicator. Exact duplicates are caught by
// a text-hash set; near duplicates by a 128-hash minhash index (64 bands
// of 2 rows) whose candidates are verified with exact Jaccard over the
// shingle sets. Retweets are dropped outright.
class Deduplicator {
 public:
  explicit Deduplicator(double threshold, int num_hashes = 128, int band_rows = 2);

  // True when the tweet survives (first occurrence, not a duplicate).
  bool offer(const CleanTweet& tweet);

  size_t dropped_retweets() const { return dropped_retweets_; }
  size_t dropped_exact() const { return dropped_exact_; }
  size_t dropped_near() const { return dropped_near_; }

 private:
  std::vector<uint64_t> signature(const std::unordered_set<uint64_t>& shingles) const;

  double threshold_;
  int num_hashes_;
  int band_rows_;
  int num_bands_;
  std::vector<uint64_t> hash_seeds_;
  std::unordered_set<uint64_t> exact_;
  std::vector<std::unordered_set<uint64_t>> kept_shingles_;
  std::unordered_map<uint64_t, std::vector<size_t>> band_index_;
  size_t dropped_retweets_ = 0;
  size_t dropped_exact_ = 0;
  size_t dropped_near_ = 0;
};

// Convenience wrapper over the streaming interface.
std::vector<CleanTweet> dedup_corpus(const std::vector<CleanTweet>& tweets,
                                     double threshold);

}  // namespace ctpt
