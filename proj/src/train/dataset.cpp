#include "ctpt/train/dataset.hpp"

#include <algorithm>
#include <fstream>

#include "ctpt/util/error.hpp"

namespace ctpt {

int epochs_for_dataset(const std::string& name) {
  if (name == "SST-2" || name == "CC" || name == "SE") return 3;
  if (name == "VC" || name == "VS") return 5;
  if (name == "MVS") return 10;
  return 3;
}

namespace {

// Parses one CSV record, consuming additional lines for quoted newlines.
std::vector<std::string> parse_csv_record(std::istream& in, std::string line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  size_t i = 0;
  for (;;) {
    if (i >= line.size()) {
      if (quoted) {
        std::string next;
        if (!std::getline(in, next)) break;
        field.push_back('\n');
        line = std::move(next);
        i = 0;
        continue;
      }
      break;
    }
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field.push_back(c);
        ++i;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
      ++i;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++i;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

std::vector<LabeledExample> load_labeled_csv(const std::string& path,
                                             std::vector<std::string>& classes) {
  std::ifstream in(path);
  if (!in) throw data_error("dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("dataset: empty file " + path);
  if (line != "text,label") {
    throw data_error("dataset: expected header 'text,label' in " + path);
  }
  std::vector<LabeledExample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = parse_csv_record(in, line);
    if (fields.size() != 2) {
      throw data_error("dataset: expected 2 fields, got " +
                       std::to_string(fields.size()) + " in " + path);
    }
    auto it = std::find(classes.begin(), classes.end(), fields[1]);
    int label;
    if (it == classes.end()) {
      label = static_cast<int>(classes.size());
      classes.push_back(fields[1]);
    } else {
      label = static_cast<int>(it - classes.begin());
    }
    out.push_back({std::move(fields[0]), label});
  }
  return out;
}

LabeledDataset load_labeled_dataset(const std::string& dir,
                                    const std::string& name) {
  LabeledDataset ds;
  ds.name = name;
  ds.train = load_labeled_csv(dir + "/" + name + ".train.csv", ds.classes);
  ds.dev = load_labeled_csv(dir + "/" + name + ".dev.csv", ds.classes);
  ds.epochs = epochs_for_dataset(name);
  if (ds.train.empty()) throw data_error("dataset " + name + ": empty train split");
  if (ds.dev.empty()) throw data_error("dataset " + name + ": empty dev split");
  return ds;
}

}  // namespace ctpt
