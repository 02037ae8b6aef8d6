#include "ctpt/corpus/segment.hpp"

namespace ctpt {

namespace {
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
}  // namespace

SentenceDoc segment_sentences(const CleanTweet& tweet) {
  SentenceDoc doc;
  doc.id = tweet.id;
  const std::string& s = tweet.text;

  // Terminal punctuation is ASCII, so a byte scan is safe on UTF-8.
  size_t start = 0;
  size_t i = 0;
  auto flush = [&](size_t end) {
    while (start < end && s[start] == ' ') ++start;
    size_t stop = end;
    while (stop > start && s[stop - 1] == ' ') --stop;
    if (stop > start) doc.sentences.push_back(s.substr(start, stop - start));
  };
  while (i < s.size()) {
    if (is_terminal(s[i])) {
      size_t run = i;
      while (run < s.size() && is_terminal(s[run])) ++run;
      if (run == s.size() || s[run] == ' ') {
        flush(run);
        start = run;
        i = run;
        continue;
      }
      i = run;
      continue;
    }
    ++i;
  }
  flush(s.size());
  return doc;
}

}  // namespace ctpt
