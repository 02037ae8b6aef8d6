#pragma once

#include "ctpt/corpus/tweet.hpp"

namespace ctpt {

// Splits on runs of terminal punctuation (. ! ?) followed by whitespace or
// end of text. A tweet without terminal punctuation yields one sentence.
// Returns a doc with zero sentences when the text is empty; the caller
// drops such records.
SentenceDoc segment_sentences(const CleanTweet& tweet);

}  // namespace ctpt
