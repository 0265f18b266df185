#pragma once

#include <vector>

#include "haptex/nn/layers.hpp"

namespace haptex::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter list. Throws TrainingAbort on a
// non-finite gradient.
class Adam {
 public:
  Adam(std::vector<ParamRef> params, AdamConfig cfg = {});

  void step();
  void zero_grads();

  int iterations() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  std::vector<ParamRef> params_;
  AdamConfig cfg_;
  std::vector<Matrix> m_, v_;
  int t_ = 0;
};

}  // namespace haptex::nn
