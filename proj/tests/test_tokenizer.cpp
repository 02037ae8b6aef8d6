#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "ctpt/tokenizer/vocabulary.hpp"
#include "ctpt/tokenizer/wordpiece.hpp"
#include "ctpt/util/error.hpp"
#include "ctpt/util/rng.hpp"

using namespace ctpt;

namespace {

Vocabulary toy_vocab(const std::vector<std::string>& extra) {
  Vocabulary v;
  for (const auto& t : extra) v.add(t);
  return v;
}

std::vector<SentenceDoc> docs_from(const std::vector<std::string>& texts) {
  std::vector<SentenceDoc> docs;
  for (size_t i = 0; i < texts.size(); ++i) {
    docs.push_back({std::to_string(i), {texts[i]}});
  }
  return docs;
}

}  // namespace

TEST_CASE("vocab: specials occupy fixed ids, injected follow") {
  Vocabulary v;
  CHECK(v.token_of(kPadId) == "[PAD]");
  CHECK(v.token_of(kUnkId) == "[UNK]");
  CHECK(v.token_of(kClsId) == "[CLS]");
  CHECK(v.token_of(kSepId) == "[SEP]");
  CHECK(v.token_of(kMaskId) == "[MASK]");
  CHECK(v.is_injected(kUserToken));
  CHECK(v.is_injected(kUrlToken));
  CHECK(v.size() == 7);
}

TEST_CASE("build_vocab: minimal corpus gives specials plus alphabet") {
  auto v = build_vocab(docs_from({"a"}), 30);
  CHECK(v.contains("a"));
  CHECK(v.size() == 8);  // 5 specials + 2 injected + "a"
  CHECK(v.undersized_warning);
}

// Oracle (merge simulation by hand on corpus "aaab" x3): initial symbols
// a, ##a, ##b; scores pick "##ab" first, then "##aab", then the full word
// "aaab". Frozen expectations at the corresponding target sizes.
TEST_CASE("build_vocab: merge order on the aaab corpus") {
  auto corpus = docs_from({"aaab", "aaab", "aaab"});
  auto v10 = build_vocab(corpus, 10);
  CHECK(v10.size() == 10);  // alphabet only, no merges
  CHECK(v10.contains("##b"));
  CHECK_FALSE(v10.contains("##ab"));

  auto v11 = build_vocab(corpus, 11);
  CHECK(v11.contains("##ab"));

  auto v13 = build_vocab(corpus, 13);
  CHECK(v13.contains("aaab"));
  auto seq = encode("aaab", v13);
  REQUIRE(seq.ids.size() == 1);
  CHECK(v13.token_of(seq.ids[0]) == "aaab");
}

TEST_CASE("build_vocab: document order does not matter") {
  std::vector<std::string> texts = {"the cat sat", "the dog ran",
                                    "a cat ran fast", "dogs and cats"};
  auto a = build_vocab(docs_from(texts), 60);
  std::reverse(texts.begin(), texts.end());
  auto b = build_vocab(docs_from(texts), 60);
  CHECK(a.tokens() == b.tokens());
}

TEST_CASE("build_vocab: rare pairs (frequency < 2) are never merged") {
  auto v = build_vocab(docs_from({"xy"}), 100);
  CHECK(v.contains("x"));
  CHECK(v.contains("##y"));
  CHECK_FALSE(v.contains("xy"));
  CHECK(v.undersized_warning);
}

TEST_CASE("encode: greedy longest match with continuations") {
  auto v = toy_vocab({"un", "##aff", "##able", "##a"});
  auto seq = encode("unaffable", v);
  REQUIRE(seq.ids.size() == 3);
  CHECK(v.token_of(seq.ids[0]) == "un");
  CHECK(v.token_of(seq.ids[1]) == "##aff");
  CHECK(v.token_of(seq.ids[2]) == "##able");
  CHECK(seq.word_start == std::vector<bool>{true, false, false});
}

TEST_CASE("encode: injected tokens emit a single id") {
  Vocabulary v;
  auto seq = encode("twitteruser", v);
  REQUIRE(seq.ids.size() == 1);
  CHECK(v.token_of(seq.ids[0]) == kUserToken);
  CHECK(seq.word_start == std::vector<bool>{true});
}

TEST_CASE("encode: undecomposable word becomes a single [UNK]") {
  auto v = toy_vocab({"hello"});
  auto seq = encode("zzz", v);
  REQUIRE(seq.ids.size() == 1);
  CHECK(seq.ids[0] == kUnkId);
  CHECK(seq.word_start[0]);
}

TEST_CASE("encode: words beyond 100 chars become [UNK]") {
  auto v = toy_vocab({"a", "##a"});
  std::string long_word(101, 'a');
  auto seq = encode(long_word, v);
  REQUIRE(seq.ids.size() == 1);
  CHECK(seq.ids[0] == kUnkId);
  auto ok = encode(std::string(100, 'a'), v);
  CHECK(ok.ids.size() == 100);
}

TEST_CASE("encode: word_start count equals word count for tokenizable text") {
  auto v = toy_vocab({"one", "two", "thr", "##ee"});
  auto seq = encode("one two three two", v);
  int starts = static_cast<int>(
      std::count(seq.word_start.begin(), seq.word_start.end(), true));
  CHECK(starts == 4);
}

TEST_CASE("decode: strips specials") {
  auto v = toy_vocab({"hello"});
  uint32_t h = static_cast<uint32_t>(v.id_of("hello"));
  CHECK(decode({kClsId, h, kSepId}, v) == "hello");
}

TEST_CASE("decode: out-of-range id names the position") {
  Vocabulary v;
  CHECK_THROWS_WITH_AS(decode({static_cast<uint32_t>(v.size() + 1)}, v),
                       doctest::Contains("position 0"), Error);
}

TEST_CASE("decode(encode) is identity on 1000 in-vocab sentences") {
  std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "epsilon",
                                    "zeta", "eta", "theta"};
  auto v = toy_vocab(words);
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    int n = 1 + static_cast<int>(rng.uniform_index(12));
    for (int k = 0; k < n; ++k) {
      if (k) text += " ";
      text += words[rng.uniform_index(words.size())];
    }
    auto seq = encode(text, v);
    CHECK(decode(seq.ids, v) == text);
  }
}

TEST_CASE("vocab: save/load round trip preserves ids and hash") {
  auto v = build_vocab(docs_from({"the cat sat", "the cat ran", "the dog sat"}),
                       40);
  std::string path = "vocab_roundtrip.txt";
  v.save(path);
  auto loaded = Vocabulary::load(path);
  CHECK(loaded.tokens() == v.tokens());
  CHECK(loaded.content_hash() == v.content_hash());
  std::remove(path.c_str());
}

TEST_CASE("vocab: load rejects files without the special header") {
  std::string path = "vocab_bad.txt";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("nota\nreal\nvocab\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(Vocabulary::load(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("encode is a pure function") {
  auto v = toy_vocab({"re", "##pro", "##duce"});
  auto a = encode("reproduce re", v);
  auto b = encode("reproduce re", v);
  CHECK(a.ids == b.ids);
  CHECK(a.word_start == b.word_start);
}
