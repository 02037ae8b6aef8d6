#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctpt/model/params.hpp"
#include "ctpt/pretrain_data/example.hpp"

namespace ctpt {

struct GradCheckReport {
  struct TensorReport {
    std::string name;
    int coords_checked = 0;
    double worst_rel_err = 0;
    Eigen::Index worst_row = 0, worst_col = 0;
  };
  std::vector<TensorReport> tensors;
  double tolerance = 0;
  bool passed = false;
};

// Central finite differences in 64-bit against the analytic gradient of
// mlm_loss + nsp_loss. Samples coords_per_tensor coordinates per tensor
// (all of them for smaller tensors). Relative error per coordinate:
// |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|). Restricted to toy configs
// (<= 2 layers, hidden <= 32) to keep the sweep exact and fast.
GradCheckReport grad_check(const Parameters& params,
                           std::span<const PretrainExample> batch, double h,
                           double tolerance, int coords_per_tensor = 20,
                           uint64_t seed = 42);

}  // namespace ctpt
