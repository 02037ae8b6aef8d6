#include "ctpt/model/params.hpp"

#include "ctpt/util/hash.hpp"

namespace ctpt {

namespace {

bool is_bias(const std::string& name) {
  return name.ends_with("_b") || name.ends_with("beta") ||
         name.ends_with("output_bias");
}

bool is_ln_scale(const std::string& name) { return name.ends_with("gamma"); }

}  // namespace

Parameters init_params(const ModelConfig& config) {
  config.validate();
  Parameters p;
  p.config = config;
  p.mats = ModelMats<float>::zeros(config);
  Rng rng(config.seed);
  for (auto& [name, mat] : tensor_list(p.mats)) {
    if (is_ln_scale(name)) {
      mat->setOnes();
    } else if (is_bias(name)) {
      mat->setZero();
    } else {
      for (Eigen::Index i = 0; i < mat->rows(); ++i) {
        for (Eigen::Index j = 0; j < mat->cols(); ++j) {
          (*mat)(i, j) = static_cast<float>(rng.truncated_normal(0.02));
        }
      }
    }
  }
  return p;
}

ClassifierHead init_classifier(const Parameters& params, int num_classes,
                               uint64_t seed) {
  if (num_classes < 2) throw data_error("classifier needs >= 2 classes");
  ClassifierHead head;
  head.num_classes = num_classes;
  head.pool_w = params.mats.nsp_pool_w;
  head.pool_b = params.mats.nsp_pool_b;
  head.cls_w = RowMat<float>(params.config.hidden, num_classes);
  head.cls_b = RowMat<float>::Zero(1, num_classes);
  Rng rng(mix64(seed) | 1);
  for (Eigen::Index i = 0; i < head.cls_w.rows(); ++i) {
    for (Eigen::Index j = 0; j < head.cls_w.cols(); ++j) {
      head.cls_w(i, j) = static_cast<float>(rng.truncated_normal(0.02));
    }
  }
  return head;
}

}  // namespace ctpt
