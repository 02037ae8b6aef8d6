#include "ctpt/tokenizer/wordpiece.hpp"

#include "ctpt/text/utf8.hpp"
#include "ctpt/util/error.hpp"

namespace ctpt {

namespace {

// Appends the subword ids of one word, or a single [UNK].
void encode_word(const std::string& word, const Vocabulary& vocab,
                 TokenSequence& out) {
  if (vocab.is_injected(word)) {
    out.ids.push_back(static_cast<uint32_t>(vocab.id_of(word)));
    out.word_start.push_back(true);
    return;
  }
  std::vector<uint32_t> cps;
  if (!utf8::decode(word, cps) || cps.size() > kMaxWordChars) {
    out.ids.push_back(kUnkId);
    out.word_start.push_back(true);
    return;
  }

  std::vector<uint32_t> ids;
  size_t start = 0;
  while (start < cps.size()) {
    size_t end = cps.size();
    int64_t match = -1;
    while (end > start) {
      std::string piece = start > 0 ? "##" : "";
      for (size_t k = start; k < end; ++k) utf8::append(piece, cps[k]);
      match = vocab.id_of(piece);
      if (match >= 0) break;
      --end;
    }
    if (match < 0) {
      out.ids.push_back(kUnkId);
      out.word_start.push_back(true);
      return;
    }
    ids.push_back(static_cast<uint32_t>(match));
    start = end;
  }
  for (size_t k = 0; k < ids.size(); ++k) {
    out.ids.push_back(ids[k]);
    out.word_start.push_back(k == 0);
  }
}

}  // namespace

TokenSequence encode(const std::string& text, const Vocabulary& vocab) {
  TokenSequence out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) encode_word(text.substr(start, i - start), vocab, out);
  }
  return out;
}

std::string decode(const std::vector<uint32_t>& ids, const Vocabulary& vocab) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab.size()) {
      throw data_error("decode: id " + std::to_string(ids[i]) +
                       " out of range at position " + std::to_string(i));
    }
    if (vocab.is_special(ids[i])) continue;
    const std::string& tok = vocab.token_of(ids[i]);
    if (tok.rfind("##", 0) == 0) {
      out += tok.substr(2);
    } else {
      if (!out.empty()) out.push_back(' ');
      out += tok;
    }
  }
  return out;
}

}  // namespace ctpt
