#include "haptex/nn/optimizer.hpp"

#include <cmath>

namespace haptex::nn {

Adam::Adam(std::vector<ParamRef> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t idx = 0; idx < params_.size(); ++idx) {
    const Matrix& g = *params_[idx].grad;
    if (!g.allFinite())
      throw TrainingAbort("non-finite gradient in " + params_[idx].name);
    m_[idx] = cfg_.beta1 * m_[idx] + (1.0 - cfg_.beta1) * g;
    v_[idx] = cfg_.beta2 * v_[idx] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m_[idx] / bc1;
    const Matrix v_hat = v_[idx] / bc2;
    params_[idx].value->array() -=
        cfg_.lr * m_hat.array() / (v_hat.array().sqrt() + cfg_.eps);
  }
}

void Adam::zero_grads() {
  for (auto& p : params_) p.grad->setZero();
}

}  // namespace haptex::nn
