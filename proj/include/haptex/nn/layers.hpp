#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "haptex/errors.hpp"
#include "haptex/rng.hpp"

namespace haptex::nn {

// Feature maps are length x channels; parameters and their gradient
// accumulators are plain dense matrices addressed through ParamRef.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ParamRef {
  std::string name;
  Matrix* value;
  Matrix* grad;
};

// Zero-padded cross-correlation patches: row p holds the kernel window around
// position p, tap-major (tap * channels + channel). pad_left = (k-1)/2.
Matrix im2col_same(const Matrix& x, int kernel);

// Transpose of im2col_same: scatter-adds column gradients back onto rows.
void col2im_same_add(const Matrix& cols, int kernel, Matrix& dx);

enum class Act { linear, relu };

// Same-padded 1D convolution (cross-correlation), bias per filter, optional
// elementwise activation.
class Conv1d {
 public:
  Conv1d(std::string name, int kernel, int in_channels, int out_channels,
         Act act = Act::linear);

  void init(Rng& rng);  // Glorot uniform, zero bias

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy);  // accumulates parameter grads, returns dx

  Matrix apply(const Matrix& x) const;  // cache-free forward

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  int kernel() const { return kernel_; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

  Matrix weights;  // (k * in) x out
  Matrix bias;     // 1 x out
  Matrix dweights;
  Matrix dbias;

 private:
  Matrix preactivation(const Matrix& x) const;

  std::string name_;
  int kernel_, in_ch_, out_ch_;
  Act act_;
  Matrix x_cache_;
  Matrix pre_cache_;
};

// Window-2 max pooling along the length axis; an odd tail passes through.
// Backward routes each gradient to the first maximal element.
class MaxPool1d {
 public:
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy);

 private:
  Eigen::Index in_len_ = 0;
  Eigen::MatrixXi argmax_;
};

// Cache-free counterparts for inference paths.
Matrix maxpool2(const Matrix& x);
Matrix upsample2(const Matrix& x);

// Nearest-neighbor x2 upsampling along the length axis.
class Upsample1d {
 public:
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy);

 private:
  Eigen::Index in_len_ = 0;
};

class Dense {
 public:
  Dense(std::string name, int in_dim, int out_dim, Act act);

  void init(Rng& rng);

  Vector forward(const Vector& x);
  Vector backward(const Vector& dy);

  Vector apply(const Vector& x) const;  // cache-free forward

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }

  Matrix weights;  // out x in
  Matrix bias;     // out x 1
  Matrix dweights;
  Matrix dbias;

 private:
  std::string name_;
  Act act_;
  Vector x_cache_;
  Vector pre_cache_;
};

struct LossGrad {
  double value;
  Matrix grad;  // dL/dpred, same shape as pred
};

// Root-mean-square error over all entries; gradient (pred - target) / (N * loss)
// with the zero-loss case guarded at 1e-12.
LossGrad rmse_loss(const Matrix& pred, const Matrix& target);

// Mean squared error over all entries (reconstruction term).
LossGrad mse_loss(const Matrix& pred, const Matrix& target);

}  // namespace haptex::nn
