#pragma once

#include <string>
#include <vector>

#include "haptex/nn/layers.hpp"

namespace haptex::nn {

// 1D ConvLSTM cell with convolutional input/recurrent gate transforms and
// elementwise peephole connections, after the original formulation:
//
//   i_t = sigmoid(Wxi * X_t + Whi * H_{t-1} + Wci o C_{t-1} + b_i)
//   f_t = sigmoid(Wxf * X_t + Whf * H_{t-1} + Wcf o C_{t-1} + b_f)
//   C_t = f_t o C_{t-1} + i_t o tanh(Wxc * X_t + Whc * H_{t-1} + b_c)
//   o_t = sigmoid(Wxo * X_t + Who * H_{t-1} + Wco o C_t + b_o)
//   H_t = o_t o tanh(C_t)
//
// where * is same-padded convolution along the length axis and o is the
// Hadamard product. States are length x hidden matrices.
class ConvLstm1d {
 public:
  ConvLstm1d(std::string name, int length, int in_channels, int hidden_channels,
             int kernel, bool peephole = true);

  // Glorot-uniform gate kernels, zero biases except the forget gate at +1,
  // zero peepholes.
  void init(Rng& rng);

  // Consumes a sequence, returns every hidden state H_1..H_T; caches for BPTT.
  std::vector<Matrix> forward(const std::vector<Matrix>& inputs);

  // d_hidden[t] is dL/dH_t (zero matrices allowed); returns dL/dX_t.
  std::vector<Matrix> backward(const std::vector<Matrix>& d_hidden);

  // Single step without touching the sequence caches (unit-test surface).
  std::pair<Matrix, Matrix> step(const Matrix& x, const Matrix& h_prev,
                                 const Matrix& c_prev) const;

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  int length() const { return length_; }
  int in_channels() const { return in_ch_; }
  int hidden_channels() const { return hidden_ch_; }

  // gate blocks ordered [i | f | g | o]
  Matrix wx;    // (k*in) x 4h
  Matrix wh;    // (k*h) x 4h
  Matrix wci, wcf, wco;  // length x h
  Matrix bias;  // 1 x 4h

 private:
  struct StepCache {
    Matrix x, h_prev, c_prev;
    Matrix i, f, g, o, c, tanh_c;
  };

  void gate_preactivations(const Matrix& x, const Matrix& h_prev, Matrix& pre) const;

  std::string name_;
  int length_, in_ch_, hidden_ch_, kernel_;
  bool peephole_;

  Matrix dwx_, dwh_, dwci_, dwcf_, dwco_, dbias_;
  std::vector<StepCache> caches_;
};

}  // namespace haptex::nn
