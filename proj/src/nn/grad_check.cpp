#include "haptex/nn/grad_check.hpp"

#include <cmath>

#include "haptex/rng.hpp"

namespace haptex::nn {

GradCheckReport grad_check(const std::vector<ParamRef>& params,
                           const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           int samples_per_tensor, double h, uint64_t seed) {
  compute_grads();
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(*p.grad);

  GradCheckReport report;
  Rng rng(seed);
  for (size_t idx = 0; idx < params.size(); ++idx) {
    Matrix& w = *params[idx].value;
    const auto total = static_cast<int>(w.size());

    std::vector<int> entries;
    if (total <= samples_per_tensor) {
      entries.resize(total);
      for (int i = 0; i < total; ++i) entries[i] = i;
    } else {
      entries.reserve(samples_per_tensor);
      for (int i = 0; i < samples_per_tensor; ++i)
        entries.push_back(rng.uniform_int(0, total - 1));
    }

    for (int e : entries) {
      const double saved = w.data()[e];
      w.data()[e] = saved + h;
      const double up = loss();
      w.data()[e] = saved - h;
      const double down = loss();
      w.data()[e] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[idx].data()[e];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      ++report.entries_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = params[idx].name;
      }
    }
  }
  return report;
}

}  // namespace haptex::nn
