#pragma once

#include <cmath>

#include "ctpt/model/checkpoint.hpp"

namespace ctpt {

// Constant learning rate, no warmup.
struct AdamConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One Adam step with bias correction. Arithmetic runs in double; the
// float stores keep parameters and moments identical to what a
// checkpoint round trip would produce.
template <typename S>
void adam_update(Parameters& params, OptimizerState& opt,
                 const ModelMats<S>& grads, const AdamConfig& cfg) {
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);

  auto ps = tensor_list(params.mats);
  auto ms = tensor_list(opt.m);
  auto vs = tensor_list(opt.v);
  auto gs = tensor_list(const_cast<ModelMats<S>&>(grads));
  for (size_t i = 0; i < ps.size(); ++i) {
    auto& p = *ps[i].second;
    auto& m = *ms[i].second;
    auto& v = *vs[i].second;
    const auto& g = *gs[i].second;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      double gk = static_cast<double>(g.data()[k]);
      double mk = cfg.beta1 * m.data()[k] + (1.0 - cfg.beta1) * gk;
      double vk = cfg.beta2 * v.data()[k] + (1.0 - cfg.beta2) * gk * gk;
      m.data()[k] = static_cast<float>(mk);
      v.data()[k] = static_cast<float>(vk);
      double update = cfg.lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.eps);
      p.data()[k] = static_cast<float>(p.data()[k] - update);
    }
  }
}

}  // namespace ctpt
