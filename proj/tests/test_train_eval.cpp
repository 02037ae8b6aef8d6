#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ctpt/pretrain_data/generator.hpp"
#include "ctpt/tokenizer/vocabulary.hpp"
#include "ctpt/train/dataset.hpp"
#include "ctpt/train/finetune.hpp"
#include "ctpt/train/matrix.hpp"
#include "ctpt/train/pretrain.hpp"
#include "ctpt/train/stats.hpp"
#include "ctpt/util/rng.hpp"

using namespace ctpt;
namespace fs = std::filesystem;

namespace {

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

// Tiny shard set over a 40-token vocabulary for loop smoke tests.
void make_tiny_shards(const std::string& dir, Vocabulary& vocab) {
  for (int i = 0; i < 35; ++i) vocab.add("t" + std::to_string(i));
  Rng rng(1);
  std::vector<SentenceDoc> docs;
  for (int d = 0; d < 60; ++d) {
    SentenceDoc doc;
    doc.id = "d" + std::to_string(d);
    for (int s = 0; s < 3; ++s) {
      std::string sent;
      for (int w = 0; w < 6; ++w) {
        sent += (w ? " t" : "t") + std::to_string(rng.uniform_index(35));
      }
      doc.sentences.push_back(sent);
    }
    docs.push_back(doc);
  }
  generate_shards(docs, vocab, 2, 3, dir, 1);
}

ModelConfig tiny_model(int vocab_size) {
  ModelConfig c;
  c.layers = 1;
  c.hidden = 16;
  c.heads = 2;
  c.ff_dim = 32;
  c.vocab_size = vocab_size;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("macro_f1: perfect predictions") {
  CHECK(macro_f1({0, 1, 2, 0}, {0, 1, 2, 0}, 3) == doctest::Approx(1.0));
}

TEST_CASE("macro_f1: symmetric confusion gives 0.5") {
  // Class 0: TP=1 FP=1 FN=1; class 1 the same; F1 = 0.5 each.
  CHECK(macro_f1({0, 1, 0, 1}, {0, 0, 1, 1}, 2) == doctest::Approx(0.5));
}

TEST_CASE("macro_f1: single-class predictor on balanced pairs") {
  // Class 0: TP=2 FP=2 -> F1 = 2/3; class 1 unpredicted -> 0; macro 1/3.
  CHECK(macro_f1({0, 0, 0, 0}, {0, 0, 1, 1}, 2) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("macro_f1: absent class still counts toward the mean") {
  // 3 declared classes, class 2 never appears: contributes F1 = 0.
  CHECK(macro_f1({0, 1}, {0, 1}, 3) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("macro_f1: input validation") {
  CHECK_THROWS_AS(macro_f1({}, {}, 2), Error);
  CHECK_THROWS_AS(macro_f1({0}, {0, 1}, 2), Error);
  CHECK_THROWS_AS(macro_f1({2}, {0}, 2), Error);
}

TEST_CASE("delta_mp: published five-row golden values within 0.5pp") {
  const double pairs[5][3] = {{0.931, 0.949, 25.88},
                              {0.824, 0.869, 25.27},
                              {0.696, 0.748, 17.07},
                              {0.937, 0.944, 10.67},
                              {0.620, 0.654, 8.97}};
  for (const auto& row : pairs) {
    CAPTURE(row[0]);
    CHECK(std::abs(delta_mp(row[0], row[1]) - row[2]) <= 0.5);
  }
}

TEST_CASE("delta_mp: anchors and monotonicity") {
  CHECK(delta_mp(0.7, 0.7) == doctest::Approx(0.0));
  CHECK(delta_mp(0.5, 0.6) > delta_mp(0.5, 0.55));
  CHECK(delta_mp(0.5, 0.4) < 0);
  CHECK_THROWS_AS(delta_mp(1.0, 0.9), Error);
}

TEST_CASE("sem: closed-form values") {
  CHECK(sem({5, 5, 5, 5}) == doctest::Approx(0.0));
  // sd([1..5], n-1) = sqrt(2.5); sem = sqrt(2.5)/sqrt(5) = sqrt(0.5).
  CHECK(sem({1, 2, 3, 4, 5}) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(sem({1, 2, 3, 4, 5}) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(sem({1.0}), Error);
}

TEST_CASE("sem: scaling values by c scales sem by |c|") {
  std::vector<double> v = {0.3, 0.9, 0.4, 0.7};
  std::vector<double> scaled;
  for (double x : v) scaled.push_back(-2.5 * x);
  CHECK(sem(scaled) == doctest::Approx(2.5 * sem(v)).epsilon(1e-12));
}

TEST_CASE("epoch policy matches the published per-dataset counts") {
  CHECK(epochs_for_dataset("SST-2") == 3);
  CHECK(epochs_for_dataset("CC") == 3);
  CHECK(epochs_for_dataset("SE") == 3);
  CHECK(epochs_for_dataset("VC") == 5);
  CHECK(epochs_for_dataset("VS") == 5);
  CHECK(epochs_for_dataset("MVS") == 10);
  CHECK(epochs_for_dataset("anything-else") == 3);
}

TEST_CASE("dataset: CSV parsing with quotes, commas and newlines") {
  TempDir dir("ctpt_csv");
  {
    std::ofstream f(dir.path / "toy.train.csv");
    f << "text,label\n";
    f << "plain text,pos\n";
    f << "\"quoted, with comma\",neg\n";
    f << "\"embedded \"\"quotes\"\" and\nnewline\",pos\n";
  }
  {
    std::ofstream f(dir.path / "toy.dev.csv");
    f << "text,label\nsimple,neg\n";
  }
  auto ds = load_labeled_dataset(dir.str(), "toy");
  REQUIRE(ds.train.size() == 3);
  CHECK(ds.train[1].text == "quoted, with comma");
  CHECK(ds.train[2].text == "embedded \"quotes\" and\nnewline");
  REQUIRE(ds.classes.size() == 2);
  CHECK(ds.classes[0] == "pos");
  CHECK(ds.train[1].label == 1);
  CHECK(ds.dev[0].label == 1);
  CHECK(ds.epochs == 3);
}

TEST_CASE("dataset: header is mandatory") {
  TempDir dir("ctpt_csv_hdr");
  std::ofstream(dir.path / "bad.train.csv") << "a,b\nx,y\n";
  std::ofstream(dir.path / "bad.dev.csv") << "text,label\nx,y\n";
  CHECK_THROWS_AS(load_labeled_dataset(dir.str(), "bad"), Error);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  c.checkpoint_interval = c.total_steps + 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("pretrain: checkpoints at cadence and resume is bit-exact") {
  TempDir shards("ctpt_pt_shards");
  Vocabulary vocab;
  make_tiny_shards(shards.str(), vocab);
  ModelConfig mc = tiny_model(static_cast<int>(vocab.size()));
  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.batch_size = 8;
  tc.total_steps = 12;
  tc.checkpoint_interval = 4;
  tc.eval_interval = 4;
  tc.seed = 5;

  TempDir full("ctpt_pt_full");
  auto uninterrupted = pretrain(tc, mc, shards.str(), full.str());
  CHECK(fs::exists(full.path / "step-0000000.ckpt"));
  CHECK(fs::exists(full.path / "step-0000004.ckpt"));
  CHECK(fs::exists(full.path / "step-0000008.ckpt"));
  CHECK(fs::exists(full.path / "step-0000012.ckpt"));
  CHECK(uninterrupted.metrics.size() == 4);  // steps 0, 4, 8, 12

  TempDir split("ctpt_pt_split");
  auto first = pretrain(tc, mc, shards.str(), split.str(), "", 8);
  auto second = pretrain(tc, mc, shards.str(), split.str(),
                         split.str() + "/step-0000008.ckpt");
  std::vector<MetricsPoint> combined = first.metrics;
  combined.insert(combined.end(), second.metrics.begin(), second.metrics.end());
  REQUIRE(combined.size() == uninterrupted.metrics.size());
  for (size_t i = 0; i < combined.size(); ++i) {
    CAPTURE(i);
    CHECK(combined[i] == uninterrupted.metrics[i]);
  }

  // Final checkpoints byte-identical too.
  std::ifstream fa(full.path / "step-0000012.ckpt", std::ios::binary);
  std::ifstream fb(split.path / "step-0000012.ckpt", std::ios::binary);
  std::string a((std::istreambuf_iterator<char>(fa)),
                std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)),
                std::istreambuf_iterator<char>());
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}

TEST_CASE("aggregate_report: baseline handling and step-0 delta") {
  std::vector<EvalCell> cells;
  cells.push_back({500, "a", {0.8, 0.9}, 0, 0, 0});
  cells.push_back({0, "a", {0.5, 0.7}, 0, 0, 0});
  auto report = aggregate_report(cells, 7, 2);
  REQUIRE(report.cells.size() == 2);
  CHECK(report.cells[0].checkpoint_step == 0);
  CHECK(report.cells[0].delta_mp_pct == 0.0);
  CHECK(report.cells[0].mean_f1 == doctest::Approx(0.6));
  CHECK(report.cells[1].delta_mp_pct ==
        doctest::Approx(delta_mp(0.6, 0.85)).epsilon(1e-12));
  // Missing baseline is an error.
  std::vector<EvalCell> orphan = {{500, "a", {0.8}, 0, 0, 0}};
  CHECK_THROWS_AS(aggregate_report(orphan, 7, 1), Error);
}

TEST_CASE("aggregate_report: synthetic published means reproduce the deltas") {
  // Feed the five published (base, model) F1 means as two-checkpoint
  // cells; the report's delta column must match the published deltas
  // within 0.5pp.
  const char* names[5] = {"SST-2", "VC", "MVS", "CC", "SE"};
  const double base[5] = {0.931, 0.824, 0.696, 0.937, 0.620};
  const double model[5] = {0.949, 0.869, 0.748, 0.944, 0.654};
  const double expected[5] = {25.88, 25.27, 17.07, 10.67, 8.97};
  std::vector<EvalCell> cells;
  for (int i = 0; i < 5; ++i) {
    cells.push_back({0, names[i], {base[i], base[i]}, 0, 0, 0});
    cells.push_back({500, names[i], {model[i], model[i]}, 0, 0, 0});
  }
  auto report = aggregate_report(cells, 1, 2);
  for (const auto& cell : report.cells) {
    if (cell.checkpoint_step == 0) continue;
    int idx = 0;
    while (std::string(names[idx]) != cell.dataset) ++idx;
    CHECK(std::abs(cell.delta_mp_pct - expected[idx]) <= 0.5);
  }
}

TEST_CASE("report: JSON round trip is exact") {
  std::vector<EvalCell> cells;
  cells.push_back({0, "x", {0.123456789012345, 1.0 / 3.0}, 0, 0, 0});
  cells.push_back({500, "x", {0.7071067811865476, 0.9}, 0, 0, 0});
  auto report = aggregate_report(cells, 42, 2);
  auto back = report_from_json(report_to_json(report));
  CHECK(back == report);
}

TEST_CASE("report: emitted files re-parse to the same aggregates") {
  TempDir dir("ctpt_report");
  std::vector<EvalCell> cells;
  cells.push_back({0, "a", {0.4, 0.5, 0.6}, 0, 0, 0});
  cells.push_back({0, "b", {0.3, 0.35, 0.4}, 0, 0, 0});
  cells.push_back({250, "a", {0.7, 0.75, 0.8}, 0, 0, 0});
  cells.push_back({250, "b", {0.5, 0.55, 0.6}, 0, 0, 0});
  auto report = aggregate_report(cells, 3, 3);
  emit_report(report, dir.str());

  std::ifstream jf(dir.path / "report.json");
  std::string text((std::istreambuf_iterator<char>(jf)),
                   std::istreambuf_iterator<char>());
  CHECK(report_from_json(text) == report);

  auto rows = report_cells_from_csv(dir.str() + "/report.csv");
  REQUIRE(rows.size() == report.cells.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].checkpoint_step == report.cells[i].checkpoint_step);
    CHECK(rows[i].dataset == report.cells[i].dataset);
    CHECK(rows[i].f1s.size() == report.cells[i].f1s.size());
    CHECK(rows[i].mean_f1 == report.cells[i].mean_f1);
    CHECK(rows[i].sem == report.cells[i].sem);
    CHECK(rows[i].delta_mp_pct == report.cells[i].delta_mp_pct);
  }

  // Plot data: one row per cell, step-0 rows at exactly zero delta.
  std::ifstream pf(dir.path / "plot_data.csv");
  std::string line;
  std::getline(pf, line);
  CHECK(line == "checkpoint_step,dataset,delta_mp_pct,sem");
  int rows_seen = 0, zero_rows = 0;
  while (std::getline(pf, line)) {
    if (line.empty()) continue;
    ++rows_seen;
    if (line.rfind("0,", 0) == 0) {
      ++zero_rows;
      CHECK(line.find(",0,") != std::string::npos);
    }
  }
  CHECK(rows_seen == 4);
  CHECK(zero_rows == 2);
}

TEST_CASE("finetune: same seed gives identical F1, class gap is an error") {
  TempDir shards("ctpt_ft_shards");
  Vocabulary vocab;
  make_tiny_shards(shards.str(), vocab);
  ModelConfig mc = tiny_model(static_cast<int>(vocab.size()));
  Checkpoint ckpt{init_params(mc), OptimizerState::zeros(mc), 0};

  LabeledDataset ds;
  ds.name = "tiny";
  ds.classes = {"a", "b"};
  ds.epochs = 1;
  Rng rng(2);
  for (int i = 0; i < 40; ++i) {
    int label = i % 2;
    std::string text;
    for (int w = 0; w < 5; ++w) {
      int tok = label == 0 ? rng.uniform_index(10) : 20 + rng.uniform_index(10);
      text += (w ? " t" : "t") + std::to_string(tok);
    }
    (i % 4 == 0 ? ds.dev : ds.train).push_back({text, label});
  }
  FinetuneConfig fc;
  fc.learning_rate = 1e-3;
  fc.epochs = 1;
  fc.seed = 11;
  double f1a = finetune(ckpt, ds, vocab, fc);
  double f1b = finetune(ckpt, ds, vocab, fc);
  CHECK(f1a == f1b);
  CHECK(f1a >= 0.0);
  CHECK(f1a <= 1.0);

  LabeledDataset gap = ds;
  gap.classes.push_back("c");  // never present in train
  CHECK_THROWS_WITH_AS(finetune(ckpt, gap, vocab, fc),
                       doctest::Contains("absent"), Error);
}

TEST_CASE("run_matrix: requires a step-0 baseline") {
  TempDir shards("ctpt_mx_shards"), ckpts("ctpt_mx_ckpts"), data("ctpt_mx_data");
  Vocabulary vocab;
  make_tiny_shards(shards.str(), vocab);
  ModelConfig mc = tiny_model(static_cast<int>(vocab.size()));
  save_checkpoint({init_params(mc), OptimizerState::zeros(mc), 100},
                  ckpts.str() + "/step-100.ckpt");
  {
    std::ofstream f(data.path / "d.train.csv");
    f << "text,label\nt1 t2,a\nt20 t21,b\n";
    std::ofstream g(data.path / "d.dev.csv");
    g << "text,label\nt3 t4,a\nt22 t23,b\n";
  }
  MatrixConfig cfg;
  cfg.repeats = 2;
  cfg.finetune.epochs = 1;
  CHECK_THROWS_WITH_AS(
      run_matrix({ckpts.str() + "/step-100.ckpt"}, data.str(), {"d"}, vocab, cfg),
      doctest::Contains("step-0"), Error);
}
