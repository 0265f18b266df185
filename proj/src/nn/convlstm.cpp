#include "haptex/nn/convlstm.hpp"

#include <cmath>

namespace haptex::nn {

namespace {

inline Matrix sigmoid(const Matrix& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

ConvLstm1d::ConvLstm1d(std::string name, int length, int in_channels, int hidden_channels,
                       int kernel, bool peephole)
    : name_(std::move(name)),
      length_(length),
      in_ch_(in_channels),
      hidden_ch_(hidden_channels),
      kernel_(kernel),
      peephole_(peephole) {
  wx = Matrix::Zero(kernel_ * in_ch_, 4 * hidden_ch_);
  wh = Matrix::Zero(kernel_ * hidden_ch_, 4 * hidden_ch_);
  wci = Matrix::Zero(length_, hidden_ch_);
  wcf = Matrix::Zero(length_, hidden_ch_);
  wco = Matrix::Zero(length_, hidden_ch_);
  bias = Matrix::Zero(1, 4 * hidden_ch_);
  dwx_ = wx;
  dwh_ = wh;
  dwci_ = wci;
  dwcf_ = wcf;
  dwco_ = wco;
  dbias_ = bias;
}

void ConvLstm1d::init(Rng& rng) {
  const double lim_x = std::sqrt(6.0 / (kernel_ * in_ch_ + kernel_ * hidden_ch_));
  for (Eigen::Index i = 0; i < wx.size(); ++i) wx.data()[i] = rng.uniform(-lim_x, lim_x);
  const double lim_h = std::sqrt(6.0 / (kernel_ * hidden_ch_ + kernel_ * hidden_ch_));
  for (Eigen::Index i = 0; i < wh.size(); ++i) wh.data()[i] = rng.uniform(-lim_h, lim_h);
  wci.setZero();
  wcf.setZero();
  wco.setZero();
  bias.setZero();
  bias.block(0, hidden_ch_, 1, hidden_ch_).setConstant(1.0);  // forget gate
}

void ConvLstm1d::gate_preactivations(const Matrix& x, const Matrix& h_prev,
                                     Matrix& pre) const {
  pre.noalias() = im2col_same(x, kernel_) * wx;
  pre.noalias() += im2col_same(h_prev, kernel_) * wh;
  pre.rowwise() += bias.row(0);
}

std::pair<Matrix, Matrix> ConvLstm1d::step(const Matrix& x, const Matrix& h_prev,
                                           const Matrix& c_prev) const {
  if (x.rows() != length_ || x.cols() != in_ch_)
    throw ShapeError(name_ + ": input must be " + std::to_string(length_) + "x" +
                     std::to_string(in_ch_));
  if (h_prev.rows() != length_ || h_prev.cols() != hidden_ch_ ||
      c_prev.rows() != length_ || c_prev.cols() != hidden_ch_)
    throw ShapeError(name_ + ": state must be " + std::to_string(length_) + "x" +
                     std::to_string(hidden_ch_));

  Matrix pre(length_, 4 * hidden_ch_);
  gate_preactivations(x, h_prev, pre);

  const int h = hidden_ch_;
  Matrix pre_i = pre.leftCols(h);
  Matrix pre_f = pre.middleCols(h, h);
  const Matrix pre_g = pre.middleCols(2 * h, h);
  Matrix pre_o = pre.rightCols(h);
  if (peephole_) {
    pre_i += wci.cwiseProduct(c_prev);
    pre_f += wcf.cwiseProduct(c_prev);
  }
  const Matrix i = sigmoid(pre_i);
  const Matrix f = sigmoid(pre_f);
  const Matrix g = pre_g.array().tanh().matrix();
  const Matrix c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  if (peephole_) pre_o += wco.cwiseProduct(c);
  const Matrix o = sigmoid(pre_o);
  const Matrix hid = o.cwiseProduct(c.array().tanh().matrix());
  return {hid, c};
}

std::vector<Matrix> ConvLstm1d::forward(const std::vector<Matrix>& inputs) {
  caches_.clear();
  caches_.reserve(inputs.size());
  std::vector<Matrix> hidden;
  hidden.reserve(inputs.size());

  Matrix h_prev = Matrix::Zero(length_, hidden_ch_);
  Matrix c_prev = Matrix::Zero(length_, hidden_ch_);
  Matrix pre(length_, 4 * hidden_ch_);
  const int h = hidden_ch_;

  for (const Matrix& x : inputs) {
    if (x.rows() != length_ || x.cols() != in_ch_)
      throw ShapeError(name_ + ": input must be " + std::to_string(length_) + "x" +
                       std::to_string(in_ch_));
    gate_preactivations(x, h_prev, pre);

    StepCache cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;

    Matrix pre_i = pre.leftCols(h);
    Matrix pre_f = pre.middleCols(h, h);
    Matrix pre_o = pre.rightCols(h);
    if (peephole_) {
      pre_i += wci.cwiseProduct(c_prev);
      pre_f += wcf.cwiseProduct(c_prev);
    }
    cache.i = sigmoid(pre_i);
    cache.f = sigmoid(pre_f);
    cache.g = pre.middleCols(2 * h, h).array().tanh().matrix();
    cache.c = cache.f.cwiseProduct(c_prev) + cache.i.cwiseProduct(cache.g);
    if (peephole_) pre_o += wco.cwiseProduct(cache.c);
    cache.o = sigmoid(pre_o);
    cache.tanh_c = cache.c.array().tanh().matrix();

    h_prev = cache.o.cwiseProduct(cache.tanh_c);
    c_prev = cache.c;
    hidden.push_back(h_prev);
    caches_.push_back(std::move(cache));
  }
  return hidden;
}

std::vector<Matrix> ConvLstm1d::backward(const std::vector<Matrix>& d_hidden) {
  if (d_hidden.size() != caches_.size())
    throw ShapeError(name_ + ": gradient sequence length mismatch");

  const int h = hidden_ch_;
  const auto steps = static_cast<int>(caches_.size());
  std::vector<Matrix> dx(steps);

  Matrix dh_next = Matrix::Zero(length_, h);
  Matrix dc_next = Matrix::Zero(length_, h);
  Matrix gates(length_, 4 * h);

  for (int t = steps - 1; t >= 0; --t) {
    const StepCache& s = caches_[t];
    const Matrix dh = d_hidden[t] + dh_next;

    const Matrix d_o = dh.cwiseProduct(s.tanh_c);
    const Matrix dpre_o =
        d_o.cwiseProduct(s.o).cwiseProduct((1.0 - s.o.array()).matrix());

    Matrix dc = dh.cwiseProduct(s.o)
                    .cwiseProduct((1.0 - s.tanh_c.array().square()).matrix()) +
                dc_next;
    if (peephole_) dc += wco.cwiseProduct(dpre_o);

    const Matrix d_f = dc.cwiseProduct(s.c_prev);
    const Matrix d_i = dc.cwiseProduct(s.g);
    const Matrix d_g = dc.cwiseProduct(s.i);
    const Matrix dpre_f =
        d_f.cwiseProduct(s.f).cwiseProduct((1.0 - s.f.array()).matrix());
    const Matrix dpre_i =
        d_i.cwiseProduct(s.i).cwiseProduct((1.0 - s.i.array()).matrix());
    const Matrix dpre_g = d_g.cwiseProduct((1.0 - s.g.array().square()).matrix());

    if (peephole_) {
      dwco_ += dpre_o.cwiseProduct(s.c);
      dwci_ += dpre_i.cwiseProduct(s.c_prev);
      dwcf_ += dpre_f.cwiseProduct(s.c_prev);
    }

    dc_next = dc.cwiseProduct(s.f);
    if (peephole_) dc_next += wci.cwiseProduct(dpre_i) + wcf.cwiseProduct(dpre_f);

    gates.leftCols(h) = dpre_i;
    gates.middleCols(h, h) = dpre_f;
    gates.middleCols(2 * h, h) = dpre_g;
    gates.rightCols(h) = dpre_o;

    dwx_.noalias() += im2col_same(s.x, kernel_).transpose() * gates;
    dwh_.noalias() += im2col_same(s.h_prev, kernel_).transpose() * gates;
    dbias_.row(0) += gates.colwise().sum();

    dx[t] = Matrix::Zero(length_, in_ch_);
    col2im_same_add(gates * wx.transpose(), kernel_, dx[t]);
    dh_next = Matrix::Zero(length_, h);
    col2im_same_add(gates * wh.transpose(), kernel_, dh_next);
  }
  return dx;
}

void ConvLstm1d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name_ + "/wx", &wx, &dwx_});
  out.push_back({name_ + "/wh", &wh, &dwh_});
  out.push_back({name_ + "/b", &bias, &dbias_});
  if (peephole_) {
    out.push_back({name_ + "/wci", &wci, &dwci_});
    out.push_back({name_ + "/wcf", &wcf, &dwcf_});
    out.push_back({name_ + "/wco", &wco, &dwco_});
  }
}

void ConvLstm1d::zero_grads() {
  dwx_.setZero();
  dwh_.setZero();
  dwci_.setZero();
  dwcf_.setZero();
  dwco_.setZero();
  dbias_.setZero();
}

}  // namespace haptex::nn
