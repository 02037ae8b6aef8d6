// End-to-end checks of the command-line binary: config precedence
// (flag > config file > default), manifests, and exit-code mapping.
// The binary path arrives via the CTPT_BIN environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "ctpt/tokenizer/vocabulary.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* p = std::getenv("CTPT_BIN");
  REQUIRE(p != nullptr);
  return p;
}

int run(const std::string& args) {
  std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / name;
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// A small corpus: enough repetition for a handful of merges.
void write_docs(const fs::path& p) {
  std::ofstream f(p);
  for (int i = 0; i < 30; ++i) {
    f << R"({"id":")" << i << R"(","sentences":["the cat sat here","the dog ran far"]})"
      << "\n";
  }
}

}  // namespace

TEST_CASE("cli: usage errors exit 1") {
  CHECK(run("definitely-not-a-subcommand") == 1);
  CHECK(run("prep --no-such-flag") == 1);
  CHECK(run("prep") == 1);  // missing required flags
  CHECK(run("--help") == 0);
}

TEST_CASE("cli: data errors exit 2") {
  TempDir dir("ctpt_cli_data");
  CHECK(run("prep --in " + dir.str() + "/missing.jsonl --out " + dir.str() +
            "/out.jsonl") == 2);
  CHECK(run("vocab inspect --vocab " + dir.str() + "/missing.txt") == 2);
}

TEST_CASE("cli: config precedence flag > file > default") {
  TempDir dir("ctpt_cli_prec");
  write_docs(dir.path / "docs.jsonl");
  std::ofstream(dir.path / "cfg.json") << R"({"size": 25})";

  // 1. Default: target size is the 30000 cap; tiny corpus stops early
  //    with everything it can merge.
  REQUIRE(run("vocab build --in " + dir.str() + "/docs.jsonl --out " +
              dir.str() + "/v_default.txt") == 0);
  auto v_default = ctpt::Vocabulary::load(dir.str() + "/v_default.txt");

  // 2. Config file only: the configured size caps the vocabulary below the default.
  REQUIRE(run("vocab build --config " + dir.str() + "/cfg.json --in " +
              dir.str() + "/docs.jsonl --out " + dir.str() + "/v_cfg.txt") == 0);
  auto v_cfg = ctpt::Vocabulary::load(dir.str() + "/v_cfg.txt");
  CHECK(v_cfg.size() == 25);
  CHECK(v_default.size() > v_cfg.size());

  // 3. Flag beats the config file.
  REQUIRE(run("vocab build --config " + dir.str() + "/cfg.json --size 30 --in " +
              dir.str() + "/docs.jsonl --out " + dir.str() + "/v_flag.txt") == 0);
  auto v_flag = ctpt::Vocabulary::load(dir.str() + "/v_flag.txt");
  CHECK(v_flag.size() == 30);

  // Manifest records the effective run.
  std::ifstream mf(dir.path / "run_manifest.json");
  REQUIRE(mf.good());
  json m = json::parse(mf);
  CHECK(m.at("stage") == "vocab-build");
  CHECK(m.contains("config_hash"));
  CHECK(m.contains("seed"));
}

TEST_CASE("cli: prep stage writes outputs and a reject log") {
  TempDir dir("ctpt_cli_prep");
  {
    std::ofstream f(dir.path / "tweets.jsonl");
    f << R"({"id":"1","text":"Hello @bob check https://x.co now. Great!"})" << "\n";
    f << R"({"id":"2","text":"RT @ann: something"})" << "\n";
    f << R"({"id":"","text":"no id"})" << "\n";
  }
  REQUIRE(run("prep --in " + dir.str() + "/tweets.jsonl --out " + dir.str() +
              "/docs.jsonl --dedup-threshold 0.8") == 0);
  std::ifstream docs(dir.path / "docs.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(docs, line)) {
    if (!line.empty()) ++n;
  }
  CHECK(n == 1);  // retweet dropped, empty id rejected
  CHECK(fs::exists(dir.path / "docs.jsonl.rejects"));
  std::ifstream rej(dir.path / "docs.jsonl.rejects");
  json r = json::parse(rej);
  CHECK(r.at("reason").is_string());
}
