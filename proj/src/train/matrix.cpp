#include "ctpt/train/matrix.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctpt/model/checkpoint.hpp"
#include "ctpt/train/stats.hpp"
#include "ctpt/util/error.hpp"

namespace ctpt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void finalize_cell(EvalCell& cell) {
  cell.mean_f1 = std::accumulate(cell.f1s.begin(), cell.f1s.end(), 0.0) /
                 static_cast<double>(cell.f1s.size());
  cell.sem = ctpt::sem(cell.f1s);
}

std::string cell_state_path(const std::string& state_dir, uint64_t step,
                            const std::string& dataset) {
  return state_dir + "/cell-" + std::to_string(step) + "-" + dataset + ".json";
}

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw data_error("cannot write " + tmp);
    out << content;
    if (!out) throw data_error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

json cell_to_json(const EvalCell& cell) {
  return json{{"checkpoint_step", cell.checkpoint_step},
              {"dataset", cell.dataset},
              {"f1s", cell.f1s},
              {"mean_f1", cell.mean_f1},
              {"sem", cell.sem},
              {"delta_mp_pct", cell.delta_mp_pct}};
}

EvalCell cell_from_json(const json& j) {
  EvalCell cell;
  cell.checkpoint_step = j.at("checkpoint_step").get<uint64_t>();
  cell.dataset = j.at("dataset").get<std::string>();
  cell.f1s = j.at("f1s").get<std::vector<double>>();
  cell.mean_f1 = j.at("mean_f1").get<double>();
  cell.sem = j.at("sem").get<double>();
  cell.delta_mp_pct = j.at("delta_mp_pct").get<double>();
  return cell;
}

}  // namespace

EvalReport aggregate_report(std::vector<EvalCell> cells, uint64_t base_seed,
                            int repeats) {
  if (cells.empty()) throw data_error("aggregate_report: no cells");
  std::sort(cells.begin(), cells.end(), [](const EvalCell& a, const EvalCell& b) {
    if (a.checkpoint_step != b.checkpoint_step) {
      return a.checkpoint_step < b.checkpoint_step;
    }
    return a.dataset < b.dataset;
  });
  for (auto& cell : cells) {
    if (cell.f1s.empty()) {
      throw data_error("aggregate_report: cell " + cell.dataset + "@" +
                       std::to_string(cell.checkpoint_step) + " has no F1s");
    }
    finalize_cell(cell);
  }
  for (auto& cell : cells) {
    if (cell.checkpoint_step == 0) {
      cell.delta_mp_pct = 0.0;  // baseline compares against itself
      continue;
    }
    auto base = std::find_if(cells.begin(), cells.end(), [&](const EvalCell& c) {
      return c.checkpoint_step == 0 && c.dataset == cell.dataset;
    });
    if (base == cells.end()) {
      throw data_error("aggregate_report: no step-0 baseline for " + cell.dataset);
    }
    cell.delta_mp_pct = delta_mp(base->mean_f1, cell.mean_f1);
  }
  EvalReport report;
  report.base_seed = base_seed;
  report.repeats = repeats;
  report.cells = std::move(cells);
  return report;
}

EvalReport run_matrix(const std::vector<std::string>& checkpoint_paths,
                      const std::string& dataset_dir,
                      const std::vector<std::string>& dataset_names,
                      const Vocabulary& vocab, const MatrixConfig& cfg) {
  if (cfg.repeats < 1) throw data_error("run_matrix: repeats < 1");
  if (checkpoint_paths.empty()) throw data_error("run_matrix: no checkpoints");
  if (dataset_names.empty()) throw data_error("run_matrix: no datasets");
  if (!cfg.state_dir.empty()) fs::create_directories(cfg.state_dir);

  std::vector<Checkpoint> checkpoints;
  bool have_baseline = false;
  for (const auto& path : checkpoint_paths) {
    checkpoints.push_back(load_checkpoint(path));
    have_baseline = have_baseline || checkpoints.back().step == 0;
  }
  if (!have_baseline) {
    throw data_error(
        "run_matrix: checkpoint list lacks a step-0 baseline; "
        "the improvement metric is undefined without one");
  }

  std::vector<LabeledDataset> datasets;
  for (const auto& name : dataset_names) {
    datasets.push_back(load_labeled_dataset(dataset_dir, name));
  }

  std::vector<EvalCell> cells;
  for (const auto& ckpt : checkpoints) {
    for (size_t d = 0; d < datasets.size(); ++d) {
      EvalCell cell;
      cell.checkpoint_step = ckpt.step;
      cell.dataset = dataset_names[d];

      std::string state_path =
          cfg.state_dir.empty()
              ? ""
              : cell_state_path(cfg.state_dir, ckpt.step, cell.dataset);
      if (!state_path.empty() && fs::exists(state_path)) {
        std::ifstream in(state_path);
        json j = json::parse(in);
        if (j.at("base_seed").get<uint64_t>() == cfg.base_seed &&
            j.at("repeats").get<int>() == cfg.repeats) {
          cells.push_back(cell_from_json(j.at("cell")));
          continue;
        }
      }

      for (int r = 0; r < cfg.repeats; ++r) {
        FinetuneConfig fcfg = cfg.finetune;
        fcfg.seed = cfg.base_seed + static_cast<uint64_t>(r);
        cell.f1s.push_back(finetune(ckpt, datasets[d], vocab, fcfg));
      }
      finalize_cell(cell);
      if (!state_path.empty()) {
        json j{{"base_seed", cfg.base_seed},
               {"repeats", cfg.repeats},
               {"cell", cell_to_json(cell)}};
        write_atomic(state_path, j.dump(2) + "\n");
      }
      cells.push_back(std::move(cell));
    }
  }
  return aggregate_report(std::move(cells), cfg.base_seed, cfg.repeats);
}

std::string report_to_json(const EvalReport& report) {
  json cells = json::array();
  for (const auto& cell : report.cells) cells.push_back(cell_to_json(cell));
  json j{{"version", report.version},
         {"base_seed", report.base_seed},
         {"repeats", report.repeats},
         {"cells", cells}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  EvalReport report;
  report.version = j.at("version").get<uint32_t>();
  if (report.version != 1) {
    throw data_error("report: unsupported version " +
                     std::to_string(report.version));
  }
  report.base_seed = j.at("base_seed").get<uint64_t>();
  report.repeats = j.at("repeats").get<int>();
  for (const auto& c : j.at("cells")) report.cells.push_back(cell_from_json(c));
  return report;
}

void emit_report(const EvalReport& report, const std::string& out_dir) {
  if (report.cells.empty()) throw data_error("emit_report: empty report");
  fs::create_directories(out_dir);

  char buf[128];
  std::string csv = "checkpoint_step,dataset,repeat_count,mean_f1,sem,delta_mp_pct\n";
  for (const auto& cell : report.cells) {
    std::snprintf(buf, sizeof(buf), "%llu,%s,%zu,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(cell.checkpoint_step),
                  cell.dataset.c_str(), cell.f1s.size(), cell.mean_f1, cell.sem,
                  cell.delta_mp_pct);
    csv += buf;
  }
  write_atomic(out_dir + "/report.csv", csv);

  write_atomic(out_dir + "/report.json", report_to_json(report));

  std::string plot = "checkpoint_step,dataset,delta_mp_pct,sem\n";
  for (const auto& cell : report.cells) {
    std::snprintf(buf, sizeof(buf), "%llu,%s,%.17g,%.17g\n",
                  static_cast<unsigned long long>(cell.checkpoint_step),
                  cell.dataset.c_str(), cell.delta_mp_pct, cell.sem);
    plot += buf;
  }
  write_atomic(out_dir + "/plot_data.csv", plot);
}

std::vector<EvalCell> report_cells_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "checkpoint_step,dataset,repeat_count,mean_f1,sem,delta_mp_pct") {
    throw data_error("report csv: bad header in " + path);
  }
  std::vector<EvalCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw data_error("report csv: bad row: " + line);
    EvalCell cell;
    cell.checkpoint_step = std::stoull(fields[0]);
    cell.dataset = fields[1];
    cell.f1s.resize(std::stoul(fields[2]));  // sizes only; values not in CSV
    cell.mean_f1 = std::stod(fields[3]);
    cell.sem = std::stod(fields[4]);
    cell.delta_mp_pct = std::stod(fields[5]);
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace ctpt
