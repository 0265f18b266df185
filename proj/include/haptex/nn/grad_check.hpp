#pragma once

#include <functional>
#include <string>
#include <vector>

#include "haptex/nn/layers.hpp"

namespace haptex::nn {

struct GradCheckReport {
  double max_rel_err = 0.0;
  int entries_checked = 0;
  std::string worst_param;
};

// Compares analytic gradients against central finite differences.
//
// `loss` runs a full forward pass and returns the scalar loss;
// `compute_grads` zeroes accumulators and runs forward + backward once.
// A seeded subsample of up to `samples_per_tensor` entries is checked per
// parameter tensor. Relative error uses max(|analytic|, |numeric|, 1e-6) as
// the denominator.
GradCheckReport grad_check(const std::vector<ParamRef>& params,
                           const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           int samples_per_tensor = 200, double h = 1e-5,
                           uint64_t seed = 17);

}  // namespace haptex::nn
