#include "ctpt/train/stats.hpp"

#include <cmath>

#include "ctpt/util/error.hpp"

namespace ctpt {

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& golds,
                int num_classes) {
  if (predictions.empty()) throw data_error("macro_f1: empty input");
  if (predictions.size() != golds.size()) {
    throw data_error("macro_f1: prediction/gold length mismatch");
  }
  if (num_classes < 1) throw data_error("macro_f1: need at least one class");

  std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (size_t i = 0; i < predictions.size(); ++i) {
    int p = predictions[i], g = golds[i];
    if (p < 0 || p >= num_classes || g < 0 || g >= num_classes) {
      throw data_error("macro_f1: label out of range at index " +
                       std::to_string(i));
    }
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  double sum = 0;
  for (int c = 0; c < num_classes; ++c) {
    double denom = 2.0 * tp[c] + fp[c] + fn[c];
    sum += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
  }
  return sum / num_classes;
}

double delta_mp(double f1_base, double f1_model) {
  if (f1_base >= 1.0) {
    throw data_error("delta_mp: undefined for baseline F1 >= 1");
  }
  return (f1_model - f1_base) / (1.0 - f1_base) * 100.0;
}

double sem(const std::vector<double>& values) {
  const size_t n = values.size();
  if (n < 2) throw data_error("sem: need at least 2 values");
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return sd / std::sqrt(static_cast<double>(n));
}

}  // namespace ctpt
