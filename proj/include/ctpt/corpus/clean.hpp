#pragma once

#include <optional>
#include <string>

#include "ctpt/corpus/emoji.hpp"
#include "ctpt/corpus/tweet.hpp"

namespace ctpt {

struct CleanResult {
  std::optional<CleanTweet> tweet;  // empty when rejected
  std::string reject_reason;        // set when rejected
};

// Normalizes and pseudonymizes one tweet:
//   - retweet tag ("RT" before a leading mention, optional trailing colon)
//     removed, was_retweet set; the mention itself survives as the user token
//   - @usernames -> kUserToken, URLs -> kUrlToken
//   - emoji -> " :shortcode: " via the table, unknown emoji dropped
//   - control characters removed, ASCII lowercased, whitespace collapsed
// Rejects (instead of throwing) on malformed UTF-8, empty id, over-long text.
CleanResult clean_tweet(const RawTweet& raw, const EmojiTable& emoji);

}  // namespace ctpt
