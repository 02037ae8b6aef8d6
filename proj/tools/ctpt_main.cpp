// Command-line entry point: one subcommand per pipeline stage.
//
// Config precedence is flag > --config JSON file > built-in default.
// Every run writes a run_manifest.json (config hash + seed) next to its
// primary output so any stage can be re-run identically.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctpt/corpus/prep.hpp"
#include "ctpt/model/checkpoint.hpp"
#include "ctpt/pretrain_data/generator.hpp"
#include "ctpt/tokenizer/vocabulary.hpp"
#include "ctpt/tokenizer/wordpiece.hpp"
#include "ctpt/train/finetune.hpp"
#include "ctpt/train/matrix.hpp"
#include "ctpt/train/pretrain.hpp"
#include "ctpt/util/error.hpp"
#include "ctpt/util/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Options registered through Opts can be backfilled from a JSON config
// file after parsing; values given on the command line always win.
class Opts {
 public:
  explicit Opts(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config file (flags win)");
    app_->add_option("--jobs", jobs_, "worker parallelism bound")
        ->check(CLI::PositiveNumber);
  }

  template <typename T>
  CLI::Option* add(const std::string& flag, T& var, const std::string& desc) {
    std::string key = flag.substr(flag.find_first_not_of('-'));
    CLI::Option* opt = app_->add_option(flag, var, desc);
    appliers_.push_back([key, opt, &var](const json& cfg) {
      if (opt->count() == 0 && cfg.contains(key)) cfg.at(key).get_to(var);
    });
    return opt;
  }

  CLI::Option* add_flag(const std::string& flag, bool& var,
                        const std::string& desc) {
    std::string key = flag.substr(flag.find_first_not_of('-'));
    CLI::Option* opt = app_->add_flag(flag, var, desc);
    appliers_.push_back([key, opt, &var](const json& cfg) {
      if (opt->count() == 0 && cfg.contains(key)) cfg.at(key).get_to(var);
    });
    return opt;
  }

  // Applies the config file (if any) and returns the effective config as
  // JSON for hashing into the manifest.
  json finalize() {
    json cfg = json::object();
    if (!config_path_.empty()) {
      std::ifstream in(config_path_);
      if (!in) throw ctpt::data_error("cannot open config " + config_path_);
      cfg = json::parse(in, nullptr, false);
      if (cfg.is_discarded() || !cfg.is_object()) {
        throw ctpt::data_error("config " + config_path_ +
                               " is not a JSON object");
      }
    }
    for (auto& apply : appliers_) apply(cfg);
    return cfg;
  }

  int jobs() const { return jobs_; }

 private:
  CLI::App* app_;
  std::string config_path_;
  int jobs_ = 1;
  std::vector<std::function<void(const json&)>> appliers_;
};

void log_kv(std::initializer_list<std::pair<std::string, std::string>> kvs) {
  bool first = true;
  for (const auto& [k, v] : kvs) {
    std::cout << (first ? "" : " ") << k << "=" << v;
    first = false;
  }
  std::cout << "\n";
}

void write_manifest(const std::string& dir, const std::string& stage,
                    const json& effective_config, uint64_t seed) {
  fs::create_directories(dir);
  std::string canonical = effective_config.dump();
  json m{{"stage", stage},
         {"seed", seed},
         {"config", effective_config},
         {"config_hash", ctpt::fnv1a64(canonical)}};
  std::string tmp = dir + "/run_manifest.json.tmp";
  {
    std::ofstream out(tmp);
    out << m.dump(2) << "\n";
  }
  fs::rename(tmp, dir + "/run_manifest.json");
}

json flags_as_json(std::initializer_list<std::pair<std::string, json>> kvs) {
  json j = json::object();
  for (const auto& [k, v] : kvs) j[k] = v;
  return j;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"tweet-domain pretraining toolkit"};
  app.require_subcommand(1);

  // --- prep ---
  auto* prep = app.add_subcommand("prep", "clean, pseudonymize, dedup, segment");
  Opts prep_opts(prep);
  std::string prep_in, prep_out, prep_rejects, prep_emoji;
  double prep_threshold = 0.8;
  prep_opts.add("--in", prep_in, "raw tweet JSONL")->required();
  prep_opts.add("--out", prep_out, "sentence-doc JSONL out")->required();
  prep_opts.add("--rejects", prep_rejects, "reject log (default <out>.rejects)");
  prep_opts.add("--emoji", prep_emoji, "emoji shortcode TSV");
  prep_opts.add("--dedup-threshold", prep_threshold, "near-dup Jaccard threshold");

  // --- vocab ---
  auto* vocab_cmd = app.add_subcommand("vocab", "wordpiece vocabulary tools");
  vocab_cmd->require_subcommand(1);
  auto* vocab_build = vocab_cmd->add_subcommand("build", "induce from corpus");
  Opts vb_opts(vocab_build);
  std::string vb_in, vb_out;
  uint64_t vb_size = ctpt::kMaxVocabSize;
  vb_opts.add("--in", vb_in, "sentence-doc JSONL")->required();
  vb_opts.add("--out", vb_out, "vocab file out")->required();
  vb_opts.add("--size", vb_size, "target vocabulary size");
  auto* vocab_inspect = vocab_cmd->add_subcommand("inspect", "summarize a vocab");
  Opts vi_opts(vocab_inspect);
  std::string vi_vocab, vi_text;
  vi_opts.add("--vocab", vi_vocab, "vocab file")->required();
  vi_opts.add("--encode", vi_text, "optionally encode this text");

  // --- examples ---
  auto* examples = app.add_subcommand("examples", "generate pretraining shards");
  Opts ex_opts(examples);
  std::string ex_docs, ex_vocab, ex_out;
  uint64_t ex_seed = 1;
  uint32_t ex_dupe = 10;
  int ex_shards = 4;
  ex_opts.add("--docs", ex_docs, "sentence-doc JSONL")->required();
  ex_opts.add("--vocab", ex_vocab, "vocab file")->required();
  ex_opts.add("--out", ex_out, "shard directory")->required();
  ex_opts.add("--dupe-factor", ex_dupe, "passes over the corpus");
  ex_opts.add("--seed", ex_seed, "base seed");
  ex_opts.add("--num-shards", ex_shards, "train shard count");

  // --- pretrain ---
  auto* pretrain_cmd = app.add_subcommand("pretrain", "train the encoder");
  Opts pt_opts(pretrain_cmd);
  std::string pt_shards, pt_ckpt_dir, pt_resume;
  ctpt::TrainConfig tc;
  ctpt::ModelConfig mc;
  pt_opts.add("--shards", pt_shards, "shard directory")->required();
  pt_opts.add("--ckpt-dir", pt_ckpt_dir, "checkpoint directory")->required();
  pt_opts.add("--resume", pt_resume, "checkpoint to resume from");
  pt_opts.add("--lr", tc.learning_rate, "constant learning rate");
  pt_opts.add("--batch", tc.batch_size, "batch size");
  pt_opts.add("--steps", tc.total_steps, "total optimizer steps");
  pt_opts.add("--ckpt-interval", tc.checkpoint_interval, "checkpoint cadence");
  pt_opts.add("--eval-interval", tc.eval_interval, "metric cadence");
  pt_opts.add("--seed", tc.seed, "run seed");
  pt_opts.add("--layers", mc.layers, "encoder layers");
  pt_opts.add("--hidden", mc.hidden, "hidden size");
  pt_opts.add("--heads", mc.heads, "attention heads");
  pt_opts.add("--ff-dim", mc.ff_dim, "feed-forward inner size");
  pt_opts.add("--vocab-size", mc.vocab_size, "model vocabulary size");
  pt_opts.add("--model-seed", mc.seed, "parameter init seed");

  // --- finetune ---
  auto* finetune_cmd = app.add_subcommand("finetune", "finetune + dev macro-F1");
  Opts ft_opts(finetune_cmd);
  std::string ft_ckpt, ft_data_dir, ft_dataset, ft_vocab;
  ctpt::FinetuneConfig fc;
  ft_opts.add("--checkpoint", ft_ckpt, "pretrained checkpoint")->required();
  ft_opts.add("--data-dir", ft_data_dir, "labeled dataset directory")->required();
  ft_opts.add("--dataset", ft_dataset, "dataset name")->required();
  ft_opts.add("--vocab", ft_vocab, "vocab file")->required();
  ft_opts.add("--lr", fc.learning_rate, "learning rate");
  ft_opts.add("--batch", fc.batch_size, "batch size");
  ft_opts.add("--epochs", fc.epochs, "epochs (0 = dataset policy)");
  ft_opts.add("--max-len", fc.max_len, "max sequence length");
  ft_opts.add("--seed", fc.seed, "run seed");

  // --- eval-matrix ---
  auto* matrix_cmd = app.add_subcommand(
      "eval-matrix", "checkpoint x dataset x repeat evaluation");
  Opts mx_opts(matrix_cmd);
  std::string mx_ckpt_dir, mx_data_dir, mx_vocab, mx_out;
  std::vector<std::string> mx_datasets;
  ctpt::MatrixConfig mxc;
  mx_opts.add("--checkpoints", mx_ckpt_dir, "directory of .ckpt files")
      ->required();
  mx_opts.add("--datasets", mx_data_dir, "labeled dataset directory")->required();
  mx_opts.add("--dataset", mx_datasets,
              "dataset name (repeatable; default: all *.train.csv)");
  mx_opts.add("--vocab", mx_vocab, "vocab file")->required();
  mx_opts.add("--out", mx_out, "report output directory")->required();
  mx_opts.add("--repeats", mxc.repeats, "finetuning repeats per cell");
  mx_opts.add("--seed", mxc.base_seed, "base seed (repeat r uses seed+r)");
  mx_opts.add("--lr", mxc.finetune.learning_rate, "finetune learning rate");
  mx_opts.add("--batch", mxc.finetune.batch_size, "finetune batch size");
  mx_opts.add("--epochs", mxc.finetune.epochs, "epochs (0 = dataset policy)");
  mx_opts.add("--max-len", mxc.finetune.max_len, "max sequence length");
  mx_opts.add("--state-dir", mxc.state_dir,
              "cell persistence directory (default <out>/cells)");

  // --- report ---
  auto* report_cmd = app.add_subcommand("report", "re-emit files from a JSON report");
  Opts rp_opts(report_cmd);
  std::string rp_in, rp_out;
  rp_opts.add("--in", rp_in, "report.json")->required();
  rp_opts.add("--out", rp_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // all parse failures are usage errors
  }

  if (prep->parsed()) {
    prep_opts.finalize();
    if (prep_rejects.empty()) prep_rejects = prep_out + ".rejects";
    ctpt::EmojiTable emoji;
    if (!prep_emoji.empty()) emoji = ctpt::EmojiTable::load(prep_emoji);
    auto stats = ctpt::run_prep(prep_in, prep_out, prep_rejects, emoji,
                                prep_threshold);
    write_manifest(fs::path(prep_out).parent_path().string().empty()
                       ? "."
                       : fs::path(prep_out).parent_path().string(),
                   "prep",
                   flags_as_json({{"in", prep_in},
                                  {"out", prep_out},
                                  {"rejects", prep_rejects},
                                  {"emoji", prep_emoji},
                                  {"dedup-threshold", prep_threshold}}),
                   0);
    log_kv({{"stage", "prep"},
            {"read", std::to_string(stats.read)},
            {"rejected", std::to_string(stats.rejected)},
            {"dropped_retweets", std::to_string(stats.dropped_retweets)},
            {"dropped_exact", std::to_string(stats.dropped_exact)},
            {"dropped_near", std::to_string(stats.dropped_near)},
            {"written", std::to_string(stats.written)}});
    return 0;
  }

  if (vocab_build->parsed()) {
    vb_opts.finalize();
    auto docs = ctpt::load_sentence_docs(vb_in);
    ctpt::Vocabulary vocab = ctpt::build_vocab(docs, vb_size);
    vocab.save(vb_out);
    write_manifest(fs::path(vb_out).parent_path().string().empty()
                       ? "."
                       : fs::path(vb_out).parent_path().string(),
                   "vocab-build",
                   flags_as_json({{"in", vb_in}, {"out", vb_out}, {"size", vb_size}}),
                   0);
    log_kv({{"stage", "vocab-build"},
            {"size", std::to_string(vocab.size())},
            {"undersized", vocab.undersized_warning ? "1" : "0"},
            {"hash", std::to_string(vocab.content_hash())}});
    if (vocab.undersized_warning) {
      std::cerr << "warning: corpus exhausted before reaching target size\n";
    }
    return 0;
  }

  if (vocab_inspect->parsed()) {
    vi_opts.finalize();
    ctpt::Vocabulary vocab = ctpt::Vocabulary::load(vi_vocab);
    size_t continuations = 0;
    for (const auto& t : vocab.tokens()) {
      if (t.rfind("##", 0) == 0) ++continuations;
    }
    log_kv({{"stage", "vocab-inspect"},
            {"size", std::to_string(vocab.size())},
            {"continuations", std::to_string(continuations)},
            {"hash", std::to_string(vocab.content_hash())}});
    if (!vi_text.empty()) {
      auto seq = ctpt::encode(vi_text, vocab);
      std::cout << "tokens=";
      for (size_t i = 0; i < seq.ids.size(); ++i) {
        std::cout << (i ? " " : "") << vocab.token_of(seq.ids[i]);
      }
      std::cout << "\n";
    }
    return 0;
  }

  if (examples->parsed()) {
    ex_opts.finalize();
    auto docs = ctpt::load_sentence_docs(ex_docs);
    ctpt::Vocabulary vocab = ctpt::Vocabulary::load(ex_vocab);
    auto set = ctpt::generate_shards(docs, vocab, ex_dupe, ex_seed, ex_out,
                                     ex_shards);
    write_manifest(ex_out, "examples",
                   flags_as_json({{"docs", ex_docs},
                                  {"vocab", ex_vocab},
                                  {"out", ex_out},
                                  {"dupe-factor", ex_dupe},
                                  {"seed", ex_seed},
                                  {"num-shards", ex_shards}}),
                   ex_seed);
    log_kv({{"stage", "examples"},
            {"examples", std::to_string(set.example_count)},
            {"validation", std::to_string(set.validation_count)},
            {"shards", std::to_string(set.shards.size())}});
    return 0;
  }

  if (pretrain_cmd->parsed()) {
    pt_opts.finalize();
    tc.validate();
    mc.validate();
    write_manifest(pt_ckpt_dir, "pretrain",
                   flags_as_json({{"shards", pt_shards},
                                  {"ckpt-dir", pt_ckpt_dir},
                                  {"resume", pt_resume},
                                  {"lr", tc.learning_rate},
                                  {"batch", tc.batch_size},
                                  {"steps", tc.total_steps},
                                  {"ckpt-interval", tc.checkpoint_interval},
                                  {"eval-interval", tc.eval_interval},
                                  {"seed", tc.seed},
                                  {"layers", mc.layers},
                                  {"hidden", mc.hidden},
                                  {"heads", mc.heads},
                                  {"ff-dim", mc.ff_dim},
                                  {"vocab-size", mc.vocab_size},
                                  {"model-seed", mc.seed}}),
                   tc.seed);
    auto result = ctpt::pretrain(tc, mc, pt_shards, pt_ckpt_dir, pt_resume);
    for (const auto& pt : result.metrics) {
      log_kv({{"step", std::to_string(pt.step)},
              {"mlm_loss", std::to_string(pt.mlm_loss)},
              {"mlm_acc", std::to_string(pt.mlm_acc)},
              {"nsp_loss", std::to_string(pt.nsp_loss)},
              {"nsp_acc", std::to_string(pt.nsp_acc)}});
    }
    log_kv({{"stage", "pretrain"}, {"final_checkpoint", result.final_checkpoint}});
    return 0;
  }

  if (finetune_cmd->parsed()) {
    ft_opts.finalize();
    ctpt::Checkpoint ckpt = ctpt::load_checkpoint(ft_ckpt);
    ctpt::Vocabulary vocab = ctpt::Vocabulary::load(ft_vocab);
    auto dataset = ctpt::load_labeled_dataset(ft_data_dir, ft_dataset);
    double f1 = ctpt::finetune(ckpt, dataset, vocab, fc);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", f1);
    log_kv({{"stage", "finetune"},
            {"dataset", ft_dataset},
            {"checkpoint_step", std::to_string(ckpt.step)},
            {"macro_f1", buf}});
    return 0;
  }

  if (matrix_cmd->parsed()) {
    mx_opts.finalize();
    if (mxc.state_dir.empty()) mxc.state_dir = mx_out + "/cells";
    std::vector<std::string> ckpts;
    for (const auto& e : fs::directory_iterator(mx_ckpt_dir)) {
      if (e.path().extension() == ".ckpt") ckpts.push_back(e.path().string());
    }
    std::sort(ckpts.begin(), ckpts.end());
    if (mx_datasets.empty()) {
      for (const auto& e : fs::directory_iterator(mx_data_dir)) {
        std::string name = e.path().filename().string();
        const std::string suffix = ".train.csv";
        if (name.size() > suffix.size() &&
            name.substr(name.size() - suffix.size()) == suffix) {
          mx_datasets.push_back(name.substr(0, name.size() - suffix.size()));
        }
      }
      std::sort(mx_datasets.begin(), mx_datasets.end());
    }
    ctpt::Vocabulary vocab = ctpt::Vocabulary::load(mx_vocab);
    write_manifest(mx_out, "eval-matrix",
                   flags_as_json({{"checkpoints", mx_ckpt_dir},
                                  {"datasets", mx_data_dir},
                                  {"dataset", mx_datasets},
                                  {"vocab", mx_vocab},
                                  {"out", mx_out},
                                  {"repeats", mxc.repeats},
                                  {"seed", mxc.base_seed},
                                  {"lr", mxc.finetune.learning_rate},
                                  {"batch", mxc.finetune.batch_size},
                                  {"epochs", mxc.finetune.epochs},
                                  {"max-len", mxc.finetune.max_len},
                                  {"state-dir", mxc.state_dir}}),
                   mxc.base_seed);
    auto report = ctpt::run_matrix(ckpts, mx_data_dir, mx_datasets, vocab, mxc);
    ctpt::emit_report(report, mx_out);
    log_kv({{"stage", "eval-matrix"},
            {"cells", std::to_string(report.cells.size())},
            {"out", mx_out}});
    return 0;
  }

  if (report_cmd->parsed()) {
    rp_opts.finalize();
    std::ifstream in(rp_in);
    if (!in) throw ctpt::data_error("cannot open " + rp_in);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    auto report = ctpt::report_from_json(text);
    ctpt::emit_report(report, rp_out);
    log_kv({{"stage", "report"},
            {"cells", std::to_string(report.cells.size())},
            {"out", rp_out}});
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ctpt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ctpt::ErrorKind::usage:
        return 1;
      case ctpt::ErrorKind::data:
        return 2;
      case ctpt::ErrorKind::numeric:
        return 3;
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
