#pragma once

#include <string>
#include <vector>

namespace ctpt {

struct LabeledExample {
  std::string text;
  int label = 0;  // index into classes
};

struct LabeledDataset {
  std::string name;
  std::vector<std::string> classes;  // ordered by first appearance in train
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  int epochs = 3;
};

// Per-dataset finetuning epoch counts; unknown names default to 3.
int epochs_for_dataset(const std::string& name);

// Loads <dir>/<name>.train.csv and <dir>/<name>.dev.csv, each a UTF-8 CSV
// with header "text,label". Quoted fields with doubled quotes supported.
LabeledDataset load_labeled_dataset(const std::string& dir,
                                    const std::string& name);

// One CSV file; classes accumulates label names by first appearance.
std::vector<LabeledExample> load_labeled_csv(const std::string& path,
                                             std::vector<std::string>& classes);

}  // namespace ctpt
