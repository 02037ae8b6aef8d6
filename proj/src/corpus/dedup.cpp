#include "ctpt/corpus/dedup.hpp"

#include <algorithm>
#include <limits>
#include <string_view>

#include "ctpt/util/error.hpp"
#include "ctpt/util/hash.hpp"

namespace ctpt {

std::unordered_set<uint64_t> shingle_hashes(const std::string& text, int n) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) words.push_back(std::string_view(text).substr(start, i - start));
  }
  std::unordered_set<uint64_t> out;
  if (words.size() < static_cast<size_t>(n)) {
    out.insert(fnv1a64(text));
    return out;
  }
  for (size_t k = 0; k + n <= words.size(); ++k) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (int j = 0; j < n; ++j) {
      h = fnv1a64(words[k + j], h);
      h = fnv1a64("\x1f", h);
    }
    out.insert(h);
  }
  return out;
}

double jaccard(const std::unordered_set<uint64_t>& a,
               const std::unordered_set<uint64_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  size_t inter = 0;
  for (uint64_t h : small) inter += large.count(h);
  return static_cast<double>(inter) /
         static_cast<double>(a.size() + b.size() - inter);
}

Deduplicator::Deduplicator(double threshold, int num_hashes, int band_rows)
    : threshold_(threshold), num_hashes_(num_hashes), band_rows_(band_rows) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw data_error("dedup threshold must be in [0,1]");
  }
  num_bands_ = num_hashes_ / band_rows_;
  hash_seeds_.resize(num_hashes_);
  for (int i = 0; i < num_hashes_; ++i) hash_seeds_[i] = mix64(i + 1);
}

std::vector<uint64_t> Deduplicator::signature(
    const std::unordered_set<uint64_t>& shingles) const {
  std::vector<uint64_t> sig(num_hashes_, std::numeric_limits<uint64_t>::max());
  for (uint64_t h : shingles) {
    for (int i = 0; i < num_hashes_; ++i) {
      uint64_t v = mix64(h ^ hash_seeds_[i]);
      sig[i] = std::min(sig[i], v);
    }
  }
  return sig;
}

bool Deduplicator::offer(const CleanTweet& tweet) {
  if (tweet.was_retweet) {
    ++dropped_retweets_;
    return false;
  }
  uint64_t text_hash = fnv1a64(tweet.text);
  if (!exact_.insert(text_hash).second) {
    ++dropped_exact_;
    return false;
  }

  auto shingles = shingle_hashes(tweet.text);
  auto sig = signature(shingles);

  std::vector<uint64_t> band_keys(num_bands_);
  for (int b = 0; b < num_bands_; ++b) {
    uint64_t h = mix64(b + 0x51ed);
    for (int r = 0; r < band_rows_; ++r) h = mix64(h ^ sig[b * band_rows_ + r]);
    band_keys[b] = h;
  }

  std::unordered_set<size_t> candidates;
  for (uint64_t key : band_keys) {
    auto it = band_index_.find(key);
    if (it == band_index_.end()) continue;
    for (size_t idx : it->second) candidates.insert(idx);
  }
  for (size_t idx : candidates) {
    if (jaccard(shingles, kept_shingles_[idx]) >= threshold_) {
      ++dropped_near_;
      return false;
    }
  }

  size_t idx = kept_shingles_.size();
  kept_shingles_.push_back(std::move(shingles));
  for (uint64_t key : band_keys) band_index_[key].push_back(idx);
  return true;
}

std::vector<CleanTweet> dedup_corpus(const std::vector<CleanTweet>& tweets,
                                     double threshold) {
  Deduplicator dedup(threshold);
  std::vector<CleanTweet> out;
  for (const auto& t : tweets) {
    if (dedup.offer(t)) out.push_back(t);
  }
  return out;
}

}  // namespace ctpt
