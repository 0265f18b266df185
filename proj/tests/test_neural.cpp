#include <doctest.h>

#include <cmath>
#include <cstring>

#include "haptex/nn/convlstm.hpp"
#include "haptex/nn/grad_check.hpp"
#include "haptex/nn/layers.hpp"
#include "haptex/nn/optimizer.hpp"
#include "haptex/rng.hpp"

using namespace haptex;
using namespace haptex::nn;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("conv1d: k=1 identity filter") {
  Conv1d conv("c", 1, 1, 1);
  conv.weights(0, 0) = 1.0;
  Rng rng(1);
  const Matrix x = random_matrix(9, 1, rng);
  CHECK((conv.forward(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conv1d: hand cross-correlation with zero padding") {
  Conv1d conv("c", 3, 1, 1);
  conv.weights(0, 0) = 1.0;   // tap -1
  conv.weights(1, 0) = 0.0;   // tap  0
  conv.weights(2, 0) = -1.0;  // tap +1
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Matrix y = conv.forward(x);
  REQUIRE(y.rows() == 3);
  CHECK(y(0, 0) == doctest::Approx(-2.0));
  CHECK(y(1, 0) == doctest::Approx(-2.0));
  CHECK(y(2, 0) == doctest::Approx(2.0));
}

TEST_CASE("conv1d: linear in the input when bias is zero") {
  Rng rng(2);
  Conv1d conv("c", 4, 3, 5);
  conv.init(rng);
  const Matrix x = random_matrix(14, 3, rng);
  const Matrix y1 = conv.forward(x);
  const Matrix y2 = conv.forward(2.5 * x);
  CHECK((y2 - 2.5 * y1).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(conv.forward(random_matrix(14, 2, rng)), ShapeError);
}

TEST_CASE("conv1d: same padding preserves length for even kernels") {
  Rng rng(3);
  Conv1d conv("c", 4, 2, 3);
  conv.init(rng);
  CHECK(conv.forward(random_matrix(11, 2, rng)).rows() == 11);
}

TEST_CASE("maxpool1d: pairwise max and odd tail") {
  MaxPool1d pool;
  Matrix x(4, 1);
  x << 1, 3, 2, 0;
  const Matrix y = pool.forward(x);
  REQUIRE(y.rows() == 2);
  CHECK(y(0, 0) == 3.0);
  CHECK(y(1, 0) == 2.0);

  Matrix c = Matrix::Constant(8, 2, 1.25);
  CHECK(MaxPool1d().forward(c).rows() == 4);
  CHECK((MaxPool1d().forward(c).array() == 1.25).all());

  Matrix odd(5, 1);
  odd << 5, 1, 2, 2, 9;
  const Matrix yo = MaxPool1d().forward(odd);
  REQUIRE(yo.rows() == 3);
  CHECK(yo(2, 0) == 9.0);
}

TEST_CASE("maxpool1d: backward conserves gradient mass and routes to first max") {
  Rng rng(4);
  MaxPool1d pool;
  Matrix x = random_matrix(11, 3, rng);
  x(2, 1) = x(3, 1);  // force a tie
  pool.forward(x);
  const Matrix dy = random_matrix(6, 3, rng);
  const Matrix dx = pool.backward(dy);
  CHECK(dx.sum() == doctest::Approx(dy.sum()).epsilon(1e-12));
  CHECK(dx(2, 1) != 0.0);
  CHECK(dx(3, 1) == 0.0);
}

TEST_CASE("upsample1d: repetition, inverse under pooling, and shape") {
  Upsample1d up;
  Matrix x(2, 1);
  x << 7, 9;
  const Matrix y = up.forward(x);
  REQUIRE(y.rows() == 4);
  CHECK(y(0, 0) == 7.0);
  CHECK(y(1, 0) == 7.0);
  CHECK(y(2, 0) == 9.0);
  CHECK(y(3, 0) == 9.0);

  Rng rng(5);
  const Matrix r = random_matrix(72, 4, rng);
  Upsample1d up2;
  const Matrix expanded = up2.forward(r);
  CHECK(expanded.rows() == 144);
  MaxPool1d pool;
  CHECK((pool.forward(expanded) - r).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense: identity, hand ReLU case, nonnegativity") {
  Dense id("d", 3, 3, Act::linear);
  id.weights.setIdentity();
  Vector x(3);
  x << -1, 0.5, 2;
  CHECK((id.forward(x) - x).cwiseAbs().maxCoeff() == 0.0);

  Dense relu("d2", 2, 1, Act::relu);
  relu.weights << 1, 1;
  relu.bias(0, 0) = -3.0;
  Vector in(2);
  in << 1, 1;
  CHECK(relu.forward(in)(0) == 0.0);

  Rng rng(6);
  Dense wide("d3", 10, 7, Act::relu);
  wide.init(rng);
  const Vector out = wide.forward(random_matrix(10, 1, rng).col(0));
  CHECK((out.array() >= 0.0).all());
}

TEST_CASE("convlstm: zero-weight fixed point") {
  ConvLstm1d cell("lstm", 4, 2, 3, 3);
  const Matrix x = Matrix::Ones(4, 2);
  const Matrix h0 = Matrix::Zero(4, 3);

  SUBCASE("zero previous cell state") {
    const auto [h, c] = cell.step(x, h0, Matrix::Zero(4, 3));
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("nonzero previous cell state halves") {
    const Matrix c_prev = Matrix::Constant(4, 3, 0.8);
    const auto [h, c] = cell.step(x, h0, c_prev);
    CHECK((c.array() - 0.4).abs().maxCoeff() < 1e-15);
    const double want_h = 0.5 * std::tanh(0.4);
    CHECK((h.array() - want_h).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("convlstm: scalar peephole step matches hand arithmetic") {
  ConvLstm1d cell("lstm", 1, 1, 1, 1);
  cell.wx << 0.5, -0.3, 0.8, 0.2;
  cell.wh << 0.1, 0.4, -0.2, 0.3;
  cell.bias << 0.05, 1.0, -0.1, 0.2;
  cell.wci(0, 0) = 0.25;
  cell.wcf(0, 0) = -0.15;
  cell.wco(0, 0) = 0.35;

  const double x = 0.7, h_prev = -0.2, c_prev = 0.4;
  const double i = sigmoid_scalar(0.5 * x + 0.1 * h_prev + 0.25 * c_prev + 0.05);
  const double f = sigmoid_scalar(-0.3 * x + 0.4 * h_prev - 0.15 * c_prev + 1.0);
  const double g = std::tanh(0.8 * x - 0.2 * h_prev - 0.1);
  const double c = f * c_prev + i * g;
  const double o = sigmoid_scalar(0.2 * x + 0.3 * h_prev + 0.35 * c + 0.2);
  const double h = o * std::tanh(c);

  const auto [hm, cm] = cell.step(Matrix::Constant(1, 1, x), Matrix::Constant(1, 1, h_prev),
                                  Matrix::Constant(1, 1, c_prev));
  CHECK(cm(0, 0) == doctest::Approx(c).epsilon(1e-9));
  CHECK(hm(0, 0) == doctest::Approx(h).epsilon(1e-9));
  // pinned to six decimals
  CHECK(cm(0, 0) == doctest::Approx(c).epsilon(1e-6));
  CHECK(hm(0, 0) == doctest::Approx(h).epsilon(1e-6));
}

TEST_CASE("convlstm: saturated forget gate preserves the cell state") {
  ConvLstm1d cell("lstm", 5, 2, 3, 3);
  cell.bias.block(0, 3, 1, 3).setConstant(20.0);
  Rng rng(7);
  const Matrix c_prev = random_matrix(5, 3, rng);
  const auto [h, c] = cell.step(Matrix::Zero(5, 2), Matrix::Zero(5, 3), c_prev);
  CHECK((c - c_prev).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("convlstm: state shapes are time-invariant") {
  Rng rng(8);
  ConvLstm1d cell("lstm", 6, 2, 4, 3);
  cell.init(rng);
  std::vector<Matrix> xs;
  for (int t = 0; t < 5; ++t) xs.push_back(random_matrix(6, 2, rng));
  const auto hs = cell.forward(xs);
  REQUIRE(hs.size() == 5);
  for (const auto& h : hs) {
    CHECK(h.rows() == 6);
    CHECK(h.cols() == 4);
  }
}

TEST_CASE("rmse_loss: values and finite-difference gradient") {
  Matrix p(1, 4), t(1, 4);
  p << 3, 4, 0, 0;
  t.setZero();
  const auto lg = rmse_loss(p, t);
  CHECK(lg.value == doctest::Approx(2.5));

  CHECK(rmse_loss(t, t).value == 0.0);
  CHECK_THROWS_AS(rmse_loss(p, Matrix::Zero(2, 4)), ShapeError);

  Rng rng(9);
  const Matrix pred = random_matrix(3, 4, rng);
  const Matrix target = random_matrix(3, 4, rng);
  const auto base = rmse_loss(pred, target);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    Matrix up = pred, down = pred;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double numeric = (rmse_loss(up, target).value - rmse_loss(down, target).value) / (2 * h);
    CHECK(base.grad.data()[i] == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Matrix w = Matrix::Constant(3, 3, 0.5);
  Matrix g = Matrix::Zero(3, 3);
  Adam adam({{"w", &w, &g}});
  adam.step();
  CHECK((w.array() == 0.5).all());
}

TEST_CASE("adam: first step with unit gradient moves by -lr") {
  Matrix w = Matrix::Zero(1, 1);
  Matrix g = Matrix::Constant(1, 1, 1.0);
  AdamConfig cfg;
  Adam adam({{"w", &w, &g}}, cfg);
  adam.step();
  CHECK(w(0, 0) == doctest::Approx(-cfg.lr).epsilon(1e-7));
}

TEST_CASE("adam: identical runs are bit-identical, NaN aborts") {
  auto run = [](uint64_t seed) {
    Rng rng(seed);
    Matrix w = Matrix::Zero(4, 4);
    Matrix g(4, 4);
    Adam adam({{"w", &w, &g}});
    for (int it = 0; it < 25; ++it) {
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
      adam.step();
    }
    return w;
  };
  const Matrix a = run(42), b = run(42);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);

  Matrix w = Matrix::Zero(1, 1);
  Matrix g = Matrix::Constant(1, 1, std::nan(""));
  Adam adam({{"w", &w, &g}});
  CHECK_THROWS_AS(adam.step(), TrainingAbort);
}

TEST_CASE("grad_check: dense-only network below 1e-6") {
  Rng rng(10);
  Dense d1("d1", 12, 16, Act::relu);
  Dense d2("d2", 16, 4, Act::linear);
  d1.init(rng);
  d2.init(rng);
  const Vector x = random_matrix(12, 1, rng).col(0);
  const Matrix target = random_matrix(1, 4, rng);

  auto forward = [&] {
    const Vector out = d2.forward(d1.forward(x));
    return rmse_loss(out.transpose(), target).value;
  };
  auto compute = [&] {
    d1.zero_grads();
    d2.zero_grads();
    const Vector out = d2.forward(d1.forward(x));
    const auto lg = rmse_loss(out.transpose(), target);
    d1.backward(d2.backward(lg.grad.row(0).transpose()));
  };
  std::vector<ParamRef> params;
  d1.collect_params(params);
  d2.collect_params(params);
  const auto report = grad_check(params, forward, compute, 200);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_err < 1e-6);
  CHECK(report.entries_checked >= 200);
}

TEST_CASE("grad_check: conv + pool network below 1e-5") {
  Rng rng(11);
  Conv1d c1("c1", 3, 2, 4);
  Conv1d c2("c2", 4, 4, 3);
  c1.init(rng);
  c2.init(rng);
  MaxPool1d p1, p2;
  const Matrix x = random_matrix(12, 2, rng);
  const Matrix target = random_matrix(3, 3, rng);

  auto forward = [&] {
    const Matrix out = p2.forward(c2.forward(p1.forward(c1.forward(x))));
    return rmse_loss(out, target).value;
  };
  auto compute = [&] {
    c1.zero_grads();
    c2.zero_grads();
    const Matrix out = p2.forward(c2.forward(p1.forward(c1.forward(x))));
    const auto lg = rmse_loss(out, target);
    c1.backward(p1.backward(c2.backward(p2.backward(lg.grad))));
  };
  std::vector<ParamRef> params;
  c1.collect_params(params);
  c2.collect_params(params);
  const auto report = grad_check(params, forward, compute, 200);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("grad_check: three-step ConvLSTM below 1e-4") {
  Rng rng(12);
  ConvLstm1d cell("lstm", 6, 2, 3, 3);
  cell.init(rng);
  // move peepholes off zero so their gradients are exercised
  for (Eigen::Index i = 0; i < cell.wci.size(); ++i) {
    cell.wci.data()[i] = rng.uniform(-0.3, 0.3);
    cell.wcf.data()[i] = rng.uniform(-0.3, 0.3);
    cell.wco.data()[i] = rng.uniform(-0.3, 0.3);
  }
  std::vector<Matrix> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(random_matrix(6, 2, rng));
  const Matrix target = random_matrix(6, 3, rng);

  auto forward = [&] {
    const auto hs = cell.forward(xs);
    return rmse_loss(hs.back(), target).value;
  };
  auto compute = [&] {
    cell.zero_grads();
    const auto hs = cell.forward(xs);
    const auto lg = rmse_loss(hs.back(), target);
    std::vector<Matrix> dhs(xs.size(), Matrix::Zero(6, 3));
    dhs.back() = lg.grad;
    cell.backward(dhs);
  };
  std::vector<ParamRef> params;
  cell.collect_params(params);
  const auto report = grad_check(params, forward, compute, 200);
  CAPTURE(report.worst_param);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("forward passes are deterministic") {
  Rng rng(13);
  Conv1d conv("c", 3, 2, 4);
  conv.init(rng);
  const Matrix x = random_matrix(10, 2, rng);
  const Matrix y1 = conv.forward(x);
  const Matrix y2 = conv.forward(x);
  CHECK(std::memcmp(y1.data(), y2.data(), sizeof(double) * y1.size()) == 0);
}
