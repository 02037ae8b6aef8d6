#include "ctpt/corpus/clean.hpp"

#include <cctype>
#include <vector>

#include "ctpt/text/utf8.hpp"

namespace ctpt {

namespace {

bool is_word_char(uint32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
         (cp >= '0' && cp <= '9') || cp == '_';
}

bool is_space(uint32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0x0B ||
         cp == 0x0C || cp == 0xA0 || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x3000;
}

bool is_control(uint32_t cp) {
  return cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F);
}

// Matches a leading "RT @name" (optionally "rt", optional colon after the
// mention). Removes the tag and the colon; the mention stays and is
// pseudonymized by the main pass. Returns true if a tag was removed.
bool strip_retweet_tag(std::vector<uint32_t>& cps) {
  size_t i = 0;
  while (i < cps.size() && is_space(cps[i])) ++i;
  if (i + 1 >= cps.size()) return false;
  uint32_t c0 = cps[i], c1 = cps[i + 1];
  if ((c0 != 'R' && c0 != 'r') || (c1 != 'T' && c1 != 't')) return false;
  size_t j = i + 2;
  size_t ws = j;
  while (ws < cps.size() && is_space(cps[ws])) ++ws;
  if (ws == j || ws >= cps.size() || cps[ws] != '@') return false;
  size_t name = ws + 1;
  size_t end = name;
  while (end < cps.size() && is_word_char(cps[end])) ++end;
  if (end == name) return false;  // "@" with no name: not a retweet tag
  // Drop "RT" plus following whitespace; drop a colon right after the name.
  std::vector<uint32_t> out(cps.begin(), cps.begin() + i);
  out.insert(out.end(), cps.begin() + ws, cps.begin() + end);
  size_t rest = end;
  if (rest < cps.size() && cps[rest] == ':') ++rest;
  out.insert(out.end(), cps.begin() + rest, cps.end());
  cps = std::move(out);
  return true;
}

bool starts_with_at(const std::vector<uint32_t>& cps, size_t i, const char* s) {
  for (const char* p = s; *p; ++p, ++i) {
    if (i >= cps.size()) return false;
    uint32_t c = cps[i];
    if (c >= 'A' && c <= 'Z') c += 32;
    if (c != static_cast<uint32_t>(*p)) return false;
  }
  return true;
}

void append_str(std::vector<uint32_t>& out, const char* s) {
  for (const char* p = s; *p; ++p) out.push_back(static_cast<uint32_t>(*p));
}

}  // namespace

CleanResult clean_tweet(const RawTweet& raw, const EmojiTable& emoji) {
  if (raw.id.empty()) return {std::nullopt, "empty_id"};

  std::vector<uint32_t> cps;
  if (!utf8::decode(raw.text, cps)) return {std::nullopt, "malformed_unicode"};
  if (static_cast<long>(cps.size()) > kMaxTweetScalars) {
    return {std::nullopt, "text_too_long"};
  }

  bool was_retweet = false;
  while (strip_retweet_tag(cps)) was_retweet = true;

  std::vector<uint32_t> out;
  out.reserve(cps.size());
  size_t i = 0;
  while (i < cps.size()) {
    uint32_t cp = cps[i];
    if (starts_with_at(cps, i, "http://") || starts_with_at(cps, i, "https://")) {
      while (i < cps.size() && !is_space(cps[i])) ++i;
      append_str(out, kUrlToken);
      continue;
    }
    if (cp == '@' && i + 1 < cps.size() && is_word_char(cps[i + 1])) {
      i += 1;
      while (i < cps.size() && is_word_char(cps[i])) ++i;
      append_str(out, kUserToken);
      continue;
    }
    if (is_emoji_codepoint(cp)) {
      if (const std::string* code = emoji.lookup(cp)) {
        out.push_back(' ');
        out.push_back(':');
        for (char c : *code) out.push_back(static_cast<uint32_t>(c));
        out.push_back(':');
        out.push_back(' ');
      }
      // unknown emoji: dropped
      ++i;
      continue;
    }
    if (is_space(cp)) {
      out.push_back(' ');
      ++i;
      continue;
    }
    if (is_control(cp)) {
      ++i;
      continue;
    }
    if (cp >= 'A' && cp <= 'Z') cp += 32;
    out.push_back(cp);
    ++i;
  }

  // Collapse whitespace runs, trim.
  std::string text;
  bool pending_space = false;
  for (uint32_t cp : out) {
    if (cp == ' ') {
      pending_space = !text.empty();
      continue;
    }
    if (pending_space) {
      text.push_back(' ');
      pending_space = false;
    }
    utf8::append(text, cp);
  }

  CleanTweet t;
  t.id = raw.id;
  t.text = std::move(text);
  t.was_retweet = was_retweet;
  return {std::move(t), ""};
}

}  // namespace ctpt
