#pragma once

#include <vector>

namespace ctpt {

// Unweighted mean of per-class F1. A class with neither predictions nor
// golds contributes F1 = 0 and still counts in the mean.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& golds,
                int num_classes);

// Relative improvement in marginal performance, in percent:
// (f1_model - f1_base) / (1 - f1_base) * 100. Positive = improvement.
// Undefined (throws) when f1_base == 1.
double delta_mp(double f1_base, double f1_model);

// Standard error of the mean: sample standard deviation (n-1) / sqrt(n).
double sem(const std::vector<double>& values);

}  // namespace ctpt
