#include "haptex/nn/layers.hpp"

#include <cmath>

namespace haptex::nn {

Matrix im2col_same(const Matrix& x, int kernel) {
  const Eigen::Index len = x.rows();
  const Eigen::Index ch = x.cols();
  const int pad_left = (kernel - 1) / 2;
  Matrix cols = Matrix::Zero(len, kernel * ch);
  for (int t = 0; t < kernel; ++t) {
    const Eigen::Index src_begin = std::max<Eigen::Index>(0, pad_left - t);
    const Eigen::Index src_end = std::min<Eigen::Index>(len, len + pad_left - t);
    if (src_end <= src_begin) continue;
    const Eigen::Index n = src_end - src_begin;
    cols.block(src_begin, t * ch, n, ch) = x.middleRows(src_begin + t - pad_left, n);
  }
  return cols;
}

void col2im_same_add(const Matrix& cols, int kernel, Matrix& dx) {
  const Eigen::Index len = dx.rows();
  const Eigen::Index ch = dx.cols();
  const int pad_left = (kernel - 1) / 2;
  for (int t = 0; t < kernel; ++t) {
    const Eigen::Index dst_begin = std::max<Eigen::Index>(0, pad_left - t);
    const Eigen::Index dst_end = std::min<Eigen::Index>(len, len + pad_left - t);
    if (dst_end <= dst_begin) continue;
    const Eigen::Index n = dst_end - dst_begin;
    dx.middleRows(dst_begin + t - pad_left, n) += cols.block(dst_begin, t * ch, n, ch);
  }
}

Conv1d::Conv1d(std::string name, int kernel, int in_channels, int out_channels, Act act)
    : name_(std::move(name)),
      kernel_(kernel),
      in_ch_(in_channels),
      out_ch_(out_channels),
      act_(act) {
  weights = Matrix::Zero(kernel_ * in_ch_, out_ch_);
  bias = Matrix::Zero(1, out_ch_);
  dweights = Matrix::Zero(weights.rows(), weights.cols());
  dbias = Matrix::Zero(1, out_ch_);
}

void Conv1d::init(Rng& rng) {
  const double limit = std::sqrt(6.0 / (kernel_ * in_ch_ + kernel_ * out_ch_));
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    weights.data()[i] = rng.uniform(-limit, limit);
  bias.setZero();
}

Matrix Conv1d::preactivation(const Matrix& x) const {
  if (x.cols() != in_ch_)
    throw ShapeError(name_ + ": expected " + std::to_string(in_ch_) + " input channels, got " +
                     std::to_string(x.cols()));
  Matrix y = im2col_same(x, kernel_) * weights;
  y.rowwise() += bias.row(0);
  return y;
}

Matrix Conv1d::forward(const Matrix& x) {
  x_cache_ = x;
  pre_cache_ = preactivation(x);
  if (act_ == Act::relu) return pre_cache_.cwiseMax(0.0);
  return pre_cache_;
}

Matrix Conv1d::apply(const Matrix& x) const {
  Matrix y = preactivation(x);
  if (act_ == Act::relu) return y.cwiseMax(0.0);
  return y;
}

Matrix Conv1d::backward(const Matrix& dy) {
  Matrix dpre = dy;
  if (act_ == Act::relu)
    dpre = dy.cwiseProduct((pre_cache_.array() > 0.0).cast<double>().matrix());
  const Matrix cols = im2col_same(x_cache_, kernel_);
  dweights.noalias() += cols.transpose() * dpre;
  dbias.row(0) += dpre.colwise().sum();
  Matrix dx = Matrix::Zero(x_cache_.rows(), x_cache_.cols());
  col2im_same_add(dpre * weights.transpose(), kernel_, dx);
  return dx;
}

void Conv1d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name_ + "/w", &weights, &dweights});
  out.push_back({name_ + "/b", &bias, &dbias});
}

void Conv1d::zero_grads() {
  dweights.setZero();
  dbias.setZero();
}

Matrix MaxPool1d::forward(const Matrix& x) {
  in_len_ = x.rows();
  const Eigen::Index out_len = (x.rows() + 1) / 2;
  Matrix y(out_len, x.cols());
  argmax_.resize(out_len, x.cols());
  for (Eigen::Index i = 0; i < out_len; ++i) {
    const Eigen::Index a = 2 * i;
    const Eigen::Index b = std::min(a + 1, x.rows() - 1);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      // ties go to the first (lower) index
      if (x(a, c) >= x(b, c)) {
        y(i, c) = x(a, c);
        argmax_(i, c) = static_cast<int>(a);
      } else {
        y(i, c) = x(b, c);
        argmax_(i, c) = static_cast<int>(b);
      }
    }
  }
  return y;
}

Matrix MaxPool1d::backward(const Matrix& dy) {
  Matrix dx = Matrix::Zero(in_len_, dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i)
    for (Eigen::Index c = 0; c < dy.cols(); ++c) dx(argmax_(i, c), c) += dy(i, c);
  return dx;
}

Matrix Upsample1d::forward(const Matrix& x) {
  in_len_ = x.rows();
  Matrix y(2 * x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y.row(2 * i) = x.row(i);
    y.row(2 * i + 1) = x.row(i);
  }
  return y;
}

Matrix Upsample1d::backward(const Matrix& dy) {
  Matrix dx(in_len_, dy.cols());
  for (Eigen::Index i = 0; i < in_len_; ++i) dx.row(i) = dy.row(2 * i) + dy.row(2 * i + 1);
  return dx;
}

Matrix maxpool2(const Matrix& x) {
  const Eigen::Index out_len = (x.rows() + 1) / 2;
  Matrix y(out_len, x.cols());
  for (Eigen::Index i = 0; i < out_len; ++i) {
    const Eigen::Index a = 2 * i;
    const Eigen::Index b = std::min(a + 1, x.rows() - 1);
    y.row(i) = x.row(a).cwiseMax(x.row(b));
  }
  return y;
}

Matrix upsample2(const Matrix& x) {
  Matrix y(2 * x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y.row(2 * i) = x.row(i);
    y.row(2 * i + 1) = x.row(i);
  }
  return y;
}

Dense::Dense(std::string name, int in_dim, int out_dim, Act act)
    : name_(std::move(name)), act_(act) {
  weights = Matrix::Zero(out_dim, in_dim);
  bias = Matrix::Zero(out_dim, 1);
  dweights = Matrix::Zero(out_dim, in_dim);
  dbias = Matrix::Zero(out_dim, 1);
}

void Dense::init(Rng& rng) {
  const double limit = std::sqrt(6.0 / (weights.cols() + weights.rows()));
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    weights.data()[i] = rng.uniform(-limit, limit);
  bias.setZero();
}

Vector Dense::forward(const Vector& x) {
  if (x.size() != weights.cols())
    throw ShapeError(name_ + ": expected input of " + std::to_string(weights.cols()) +
                     ", got " + std::to_string(x.size()));
  x_cache_ = x;
  pre_cache_ = weights * x + bias.col(0);
  if (act_ == Act::relu) return pre_cache_.cwiseMax(0.0);
  return pre_cache_;
}

Vector Dense::apply(const Vector& x) const {
  if (x.size() != weights.cols())
    throw ShapeError(name_ + ": expected input of " + std::to_string(weights.cols()) +
                     ", got " + std::to_string(x.size()));
  Vector y = weights * x + bias.col(0);
  if (act_ == Act::relu) return y.cwiseMax(0.0);
  return y;
}

Vector Dense::backward(const Vector& dy) {
  Vector dpre = dy;
  if (act_ == Act::relu)
    dpre = dy.cwiseProduct((pre_cache_.array() > 0.0).cast<double>().matrix());
  dweights.noalias() += dpre * x_cache_.transpose();
  dbias.col(0) += dpre;
  return weights.transpose() * dpre;
}

void Dense::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name_ + "/w", &weights, &dweights});
  out.push_back({name_ + "/b", &bias, &dbias});
}

void Dense::zero_grads() {
  dweights.setZero();
  dbias.setZero();
}

LossGrad rmse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("rmse_loss: shape mismatch");
  if (pred.rows() < 1) throw ShapeError("rmse_loss: empty batch");
  const double n = static_cast<double>(pred.size());
  const Matrix err = pred - target;
  const double loss = std::sqrt(err.squaredNorm() / n);
  LossGrad out;
  out.value = loss;
  out.grad = err / (n * std::max(loss, 1e-12));
  return out;
}

LossGrad mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("mse_loss: shape mismatch");
  const double n = static_cast<double>(pred.size());
  const Matrix err = pred - target;
  LossGrad out;
  out.value = err.squaredNorm() / n;
  out.grad = 2.0 * err / n;
  return out;
}

}  // namespace haptex::nn
