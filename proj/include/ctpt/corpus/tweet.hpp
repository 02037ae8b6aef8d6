#pragma once

#include <string>
#include <vector>

namespace ctpt {

struct RawTweet {
  std::string id;
  std::string text;
  std::string created_at;  // optional, may be empty
};

struct CleanTweet {
  std::string id;
  std::string text;
  bool was_retweet = false;
};

struct SentenceDoc {
  std::string id;
  std::vector<std::string> sentences;
};

// Placeholder tokens injected into the vocabulary as whole tokens.
inline constexpr const char* kUserToken = "twitteruser";
inline constexpr const char* kUrlToken = "twitterurl";

// Sanity bound on raw tweet length, in unicode scalar values.
inline constexpr long kMaxTweetScalars = 4000;

}  // namespace ctpt
