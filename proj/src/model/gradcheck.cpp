#include "ctpt/model/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ctpt/model/encoder.hpp"
#include "ctpt/util/rng.hpp"

namespace ctpt {

GradCheckReport grad_check(const Parameters& params,
                           std::span<const PretrainExample> batch, double h,
                           double tolerance, int coords_per_tensor,
                           uint64_t seed) {
  const ModelConfig& config = params.config;
  if (config.layers > 2 || config.hidden > 32) {
    throw usage_error("grad_check: use a toy config (<= 2 layers, hidden <= 32)");
  }

  Encoder<double> enc(config);
  ModelMats<double> mats = params.mats.cast<double>();
  PretrainBatch pb = make_batch(batch, config);

  StackCache<double> cache;
  HeadCache<double> head;
  enc.forward(mats, pb, cache, head);
  ModelMats<double> analytic = enc.backward(mats, pb, cache, head);

  auto eval_loss = [&]() {
    StackCache<double> c;
    HeadCache<double> hd;
    return enc.forward(mats, pb, c, hd).losses.total();
  };

  Rng rng(seed);
  GradCheckReport report;
  report.tolerance = tolerance;
  report.passed = true;

  auto names = tensor_list(mats);
  auto grads = tensor_list(analytic);
  for (size_t ti = 0; ti < names.size(); ++ti) {
    auto& mat = *names[ti].second;
    const auto& gmat = *grads[ti].second;
    GradCheckReport::TensorReport tr;
    tr.name = names[ti].first;

    std::vector<Eigen::Index> coords;
    if (mat.size() <= coords_per_tensor) {
      for (Eigen::Index k = 0; k < mat.size(); ++k) coords.push_back(k);
    } else {
      for (int k = 0; k < coords_per_tensor; ++k) {
        coords.push_back(
            static_cast<Eigen::Index>(rng.uniform_index(mat.size())));
      }
    }

    for (Eigen::Index k : coords) {
      double saved = mat.data()[k];
      mat.data()[k] = saved + h;
      double lp = eval_loss();
      mat.data()[k] = saved - h;
      double lm = eval_loss();
      mat.data()[k] = saved;
      double fd = (lp - lm) / (2.0 * h);
      double ga = gmat.data()[k];
      double rel =
          std::fabs(ga - fd) / std::max(1e-8, std::fabs(ga) + std::fabs(fd));
      ++tr.coords_checked;
      if (rel > tr.worst_rel_err) {
        tr.worst_rel_err = rel;
        tr.worst_row = k / mat.cols();
        tr.worst_col = k % mat.cols();
      }
    }
    if (tr.worst_rel_err > tolerance) report.passed = false;
    report.tensors.push_back(std::move(tr));
  }
  return report;
}

}  // namespace ctpt
