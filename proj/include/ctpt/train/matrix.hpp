#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctpt/tokenizer/vocabulary.hpp"
#include "ctpt/train/finetune.hpp"

namespace ctpt {

// One (checkpoint, dataset) cell of the evaluation matrix.
struct EvalCell {
  uint64_t checkpoint_step = 0;
  std::string dataset;
  std::vector<double> f1s;  // one per repeat, seed order
  double mean_f1 = 0;
  double sem = 0;           // standard error of the mean over repeats
  double delta_mp_pct = 0;  // vs. the step-0 mean on the same dataset

  bool operator==(const EvalCell&) const = default;
};

struct EvalReport {
  uint32_t version = 1;
  uint64_t base_seed = 0;
  int repeats = 0;
  std::vector<EvalCell> cells;  // ordered by (checkpoint_step, dataset)

  bool operator==(const EvalReport&) const = default;
};

struct MatrixConfig {
  int repeats = 10;
  uint64_t base_seed = 1;
  FinetuneConfig finetune;  // per-repeat seed = base_seed + repeat
  std::string state_dir;    // completed cells persisted here; "" disables
};

// Finetunes every (checkpoint, dataset) pair `repeats` times and
// aggregates mean F1, SEM and the marginal-performance improvement
// against the step-0 mean. The checkpoint list must contain a step-0
// baseline. With a state_dir, finished cells are written as JSON and
// skipped when rerun.
EvalReport run_matrix(const std::vector<std::string>& checkpoint_paths,
                      const std::string& dataset_dir,
                      const std::vector<std::string>& dataset_names,
                      const Vocabulary& vocab, const MatrixConfig& cfg);

// Aggregation only (no training): builds a report from raw per-cell F1
// lists. Used for report plumbing and for replaying published numbers.
EvalReport aggregate_report(std::vector<EvalCell> cells, uint64_t base_seed,
                            int repeats);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);

// Writes report.csv (per-cell aggregate rows), report.json (full report)
// and plot_data.csv (delta-MP vs. step with SEM, for external plotting)
// into out_dir, each via temp-then-rename.
void emit_report(const EvalReport& report, const std::string& out_dir);

// Re-parses the aggregate rows of an emitted report.csv. Per-repeat F1
// values are not part of the CSV; each cell's f1s carries only the
// repeat count (zero-filled).
std::vector<EvalCell> report_cells_from_csv(const std::string& path);

}  // namespace ctpt
