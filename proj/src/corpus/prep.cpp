#include "ctpt/corpus/prep.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ctpt/corpus/clean.hpp"
#include "ctpt/corpus/dedup.hpp"
#include "ctpt/corpus/segment.hpp"
#include "ctpt/util/error.hpp"

namespace ctpt {

using nlohmann::json;

PrepStats run_prep(const std::string& input_path, const std::string& output_path,
                   const std::string& reject_path, const EmojiTable& emoji,
                   double dedup_threshold) {
  std::ifstream in(input_path);
  if (!in) throw data_error("prep: cannot open " + input_path);
  std::ofstream out(output_path);
  if (!out) throw data_error("prep: cannot open " + output_path + " for writing");
  std::ofstream rejects(reject_path);
  if (!rejects) throw data_error("prep: cannot open " + reject_path + " for writing");

  PrepStats stats;
  Deduplicator dedup(dedup_threshold);
  std::string line;
  size_t lineno = 0;

  auto reject = [&](const std::string& id, const std::string& reason) {
    ++stats.rejected;
    json r{{"id", id}, {"line", lineno}, {"reason", reason}};
    rejects << r.dump() << "\n";
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++stats.read;

    RawTweet raw;
    try {
      json j = json::parse(line);
      raw.id = j.value("id", "");
      raw.text = j.value("text", "");
      raw.created_at = j.value("created_at", "");
    } catch (const json::exception&) {
      reject("", "bad_json");
      continue;
    }

    CleanResult cleaned = clean_tweet(raw, emoji);
    if (!cleaned.tweet) {
      reject(raw.id, cleaned.reject_reason);
      continue;
    }
    if (!dedup.offer(*cleaned.tweet)) continue;

    SentenceDoc doc = segment_sentences(*cleaned.tweet);
    if (doc.sentences.empty()) {
      reject(raw.id, "empty_after_normalization");
      continue;
    }
    json j{{"id", doc.id}, {"sentences", doc.sentences}};
    out << j.dump() << "\n";
    ++stats.written;
  }

  stats.dropped_retweets = dedup.dropped_retweets();
  stats.dropped_exact = dedup.dropped_exact();
  stats.dropped_near = dedup.dropped_near();
  return stats;
}

std::vector<SentenceDoc> load_sentence_docs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::vector<SentenceDoc> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("sentences")) {
      throw data_error(path + ": malformed sentence doc at line " +
                       std::to_string(lineno));
    }
    SentenceDoc doc;
    doc.id = j.at("id").get<std::string>();
    doc.sentences = j.at("sentences").get<std::vector<std::string>>();
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace ctpt
