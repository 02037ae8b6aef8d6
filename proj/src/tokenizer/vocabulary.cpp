#include "ctpt/tokenizer/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "ctpt/text/utf8.hpp"
#include "ctpt/util/error.hpp"
#include "ctpt/util/hash.hpp"

namespace ctpt {

namespace {
const char* kSpecialNames[kNumSpecials] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                           "[MASK]"};
}

Vocabulary::Vocabulary(std::vector<std::string> injected_whole_tokens) {
  for (const char* s : kSpecialNames) add(s);
  for (auto& t : injected_whole_tokens) {
    injected_.insert(t);
    add(t);
  }
}

uint32_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  if (tokens_.size() >= kMaxVocabSize) {
    throw data_error("vocabulary exceeds " + std::to_string(kMaxVocabSize) +
                     " entries");
  }
  uint32_t id = static_cast<uint32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

int64_t Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

const std::string& Vocabulary::token_of(uint32_t id) const {
  if (id >= tokens_.size()) {
    throw data_error("token id " + std::to_string(id) + " out of range (size " +
                     std::to_string(tokens_.size()) + ")");
  }
  return tokens_[id];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw data_error("vocab: cannot write " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path,
                            std::vector<std::string> injected_whole_tokens) {
  std::ifstream in(path);
  if (!in) throw data_error("vocab: cannot open " + path);
  Vocabulary v(std::move(injected_whole_tokens));
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (lineno < kNumSpecials) {
      if (line != kSpecialNames[lineno]) {
        throw data_error("vocab: line " + std::to_string(lineno) +
                         " must be " + kSpecialNames[lineno] + ", got " + line);
      }
    } else {
      v.add(line);
    }
    ++lineno;
  }
  if (lineno < kNumSpecials) throw data_error("vocab: missing special tokens");
  return v;
}

uint64_t Vocabulary::content_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

Vocabulary build_vocab(const std::vector<SentenceDoc>& docs, size_t target_size,
                       std::vector<std::string> injected_whole_tokens) {
  Vocabulary vocab(std::move(injected_whole_tokens));
  if (target_size > kMaxVocabSize) {
    throw data_error("vocab target size exceeds " + std::to_string(kMaxVocabSize));
  }
  if (docs.empty()) throw data_error("build_vocab: empty corpus");

  // Word counts; injected whole tokens never participate in induction.
  // std::map keeps iteration order canonical regardless of input order.
  std::map<std::string, size_t> word_counts;
  for (const auto& doc : docs) {
    for (const auto& sent : doc.sentences) {
      size_t i = 0;
      while (i < sent.size()) {
        while (i < sent.size() && sent[i] == ' ') ++i;
        size_t start = i;
        while (i < sent.size() && sent[i] != ' ') ++i;
        if (i > start) {
          std::string w = sent.substr(start, i - start);
          if (!vocab.is_injected(w)) ++word_counts[w];
        }
      }
    }
  }

  // Each word as a sequence of symbols: first char plain, rest "##"-prefixed.
  struct Word {
    std::vector<std::string> symbols;
    size_t count;
  };
  std::vector<Word> words;
  std::map<std::string, size_t> symbol_freq;
  for (const auto& [text, count] : word_counts) {
    std::vector<uint32_t> cps;
    if (!utf8::decode(text, cps)) continue;  // prep guarantees valid UTF-8
    Word w;
    w.count = count;
    for (size_t k = 0; k < cps.size(); ++k) {
      std::string sym = k == 0 ? "" : "##";
      utf8::append(sym, cps[k]);
      w.symbols.push_back(std::move(sym));
    }
    for (const auto& sym : w.symbols) symbol_freq[sym] += count;
    words.push_back(std::move(w));
  }

  for (const auto& [sym, freq] : symbol_freq) vocab.add(sym);

  if (vocab.size() >= target_size) {
    vocab.undersized_warning = vocab.size() > target_size;
    return vocab;
  }

  auto merged_token = [](const std::string& left, const std::string& right) {
    return left + (right.rfind("##", 0) == 0 ? right.substr(2) : right);
  };

  while (vocab.size() < target_size) {
    // Pair frequencies over current segmentations.
    std::map<std::pair<std::string, std::string>, size_t> pair_freq;
    for (const auto& w : words) {
      for (size_t k = 0; k + 1 < w.symbols.size(); ++k) {
        pair_freq[{w.symbols[k], w.symbols[k + 1]}] += w.count;
      }
    }
    // Highest score, lexicographic tie-break on the merged string.
    double best_score = 0.0;
    std::string best_merged;
    std::pair<std::string, std::string> best_pair;
    for (const auto& [pair, freq] : pair_freq) {
      if (freq < 2) continue;
      double score = static_cast<double>(freq) /
                     (static_cast<double>(symbol_freq[pair.first]) *
                      static_cast<double>(symbol_freq[pair.second]));
      std::string merged = merged_token(pair.first, pair.second);
      if (score > best_score ||
          (score == best_score && merged < best_merged)) {
        best_score = score;
        best_merged = merged;
        best_pair = pair;
      }
    }
    if (best_score == 0.0) break;  // nothing left to merge

    vocab.add(best_merged);
    for (auto& w : words) {
      for (size_t k = 0; k + 1 < w.symbols.size();) {
        if (w.symbols[k] == best_pair.first &&
            w.symbols[k + 1] == best_pair.second) {
          symbol_freq[w.symbols[k]] -= w.count;
          symbol_freq[w.symbols[k + 1]] -= w.count;
          symbol_freq[best_merged] += w.count;
          w.symbols[k] = best_merged;
          w.symbols.erase(w.symbols.begin() + k + 1);
        } else {
          ++k;
        }
      }
    }
  }

  vocab.undersized_warning = vocab.size() < target_size;
  return vocab;
}

}  // namespace ctpt
