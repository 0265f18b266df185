// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run via ctest or directly; artifacts land in ./acceptance_work.

#include <unsupported/Eigen/FFT>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "haptex/dataset.hpp"
#include "haptex/eval.hpp"
#include "haptex/feature_file.hpp"
#include "haptex/model.hpp"
#include "haptex/nn/checkpoint.hpp"
#include "haptex/nn/grad_check.hpp"
#include "haptex/pipeline.hpp"
#include "haptex/rng.hpp"
#include "haptex/signal.hpp"
#include "haptex/tactile.hpp"
#include "haptex/vision.hpp"

using namespace haptex;
namespace fs = std::filesystem;

namespace {

int g_passed = 0;
int g_failed = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d. %-28s %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  ok ? ++g_passed : ++g_failed;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Eigen::VectorXcd naive_dft(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXcd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> acc(0, 0);
    for (Eigen::Index t = 0; t < n; ++t)
      acc += x[t] * std::exp(std::complex<double>(0, -2.0 * M_PI * k * t / n));
    out[k] = acc;
  }
  return out;
}

// --------------------------------------------------------------------------
// 1. gradient correctness

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  auto random_matrix = [&rng](Eigen::Index r, Eigen::Index c) {
    nn::Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
  };

  // dense network
  nn::Dense d1("d1", 12, 16, nn::Act::relu), d2("d2", 16, 4, nn::Act::linear);
  d1.init(rng);
  d2.init(rng);
  const nn::Vector dx = random_matrix(12, 1).col(0);
  const nn::Matrix dt = random_matrix(1, 4);
  auto dense_loss = [&] {
    return nn::rmse_loss(d2.forward(d1.forward(dx)).transpose(), dt).value;
  };
  auto dense_grads = [&] {
    d1.zero_grads();
    d2.zero_grads();
    const auto lg = nn::rmse_loss(d2.forward(d1.forward(dx)).transpose(), dt);
    d1.backward(d2.backward(lg.grad.row(0).transpose()));
  };
  std::vector<nn::ParamRef> dense_params;
  d1.collect_params(dense_params);
  d2.collect_params(dense_params);
  const auto dense_report = nn::grad_check(dense_params, dense_loss, dense_grads, 200);

  // conv + pool network
  nn::Conv1d c1("c1", 3, 2, 4), c2("c2", 4, 4, 3);
  c1.init(rng);
  c2.init(rng);
  nn::MaxPool1d p1, p2;
  const nn::Matrix cx = random_matrix(12, 2);
  const nn::Matrix ct = random_matrix(3, 3);
  auto conv_loss = [&] {
    return nn::rmse_loss(p2.forward(c2.forward(p1.forward(c1.forward(cx)))), ct).value;
  };
  auto conv_grads = [&] {
    c1.zero_grads();
    c2.zero_grads();
    const auto lg = nn::rmse_loss(p2.forward(c2.forward(p1.forward(c1.forward(cx)))), ct);
    c1.backward(p1.backward(c2.backward(p2.backward(lg.grad))));
  };
  std::vector<nn::ParamRef> conv_params;
  c1.collect_params(conv_params);
  c2.collect_params(conv_params);
  const auto conv_report = nn::grad_check(conv_params, conv_loss, conv_grads, 200);

  // three-step ConvLSTM
  nn::ConvLstm1d cell("lstm", 6, 2, 3, 3);
  cell.init(rng);
  for (Eigen::Index i = 0; i < cell.wci.size(); ++i) {
    cell.wci.data()[i] = rng.uniform(-0.3, 0.3);
    cell.wcf.data()[i] = rng.uniform(-0.3, 0.3);
    cell.wco.data()[i] = rng.uniform(-0.3, 0.3);
  }
  std::vector<nn::Matrix> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(random_matrix(6, 2));
  const nn::Matrix lt = random_matrix(6, 3);
  auto lstm_loss = [&] { return nn::rmse_loss(cell.forward(xs).back(), lt).value; };
  auto lstm_grads = [&] {
    cell.zero_grads();
    const auto lg = nn::rmse_loss(cell.forward(xs).back(), lt);
    std::vector<nn::Matrix> dhs(xs.size(), nn::Matrix::Zero(6, 3));
    dhs.back() = lg.grad;
    cell.backward(dhs);
  };
  std::vector<nn::ParamRef> lstm_params;
  cell.collect_params(lstm_params);
  const auto lstm_report = nn::grad_check(lstm_params, lstm_loss, lstm_grads, 200);

  const double elapsed = seconds_since(t0);
  const bool ok = dense_report.max_rel_err < 1e-6 && conv_report.max_rel_err < 1e-5 &&
                  lstm_report.max_rel_err < 1e-4 && elapsed < 120.0;
  report(1, "gradient correctness", ok,
         fmt("dense %.2e (<1e-6) conv %.2e (<1e-5) convlstm %.2e (<1e-4), %.1f s",
             dense_report.max_rel_err, conv_report.max_rel_err, lstm_report.max_rel_err,
             elapsed));
}

// --------------------------------------------------------------------------
// 2. DFT321 identities

void criterion_dft321() {
  Rng rng(202);
  double worst_energy = 0.0;
  double worst_bin = 0.0;
  Eigen::FFT<double> fft;

  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 48 + 8 * (trial % 12);
    Eigen::MatrixXd m(n, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    const auto in = signal::make_series(m, 1000.0);
    const auto out = signal::dft321(in);

    const double e_in = in.samples.squaredNorm();
    worst_energy = std::max(worst_energy,
                            std::abs(out.samples.squaredNorm() - e_in) / e_in);

    std::vector<std::complex<double>> spec_out, spec_axis;
    std::vector<double> buf(out.samples.col(0).data(), out.samples.col(0).data() + n);
    fft.fwd(spec_out, buf);
    Eigen::VectorXd axis_power = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < 3; ++c) {
      std::vector<double> col(m.col(c).data(), m.col(c).data() + n);
      fft.fwd(spec_axis, col);
      for (Eigen::Index k = 0; k < n; ++k) axis_power[k] += std::norm(spec_axis[k]);
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      const double denom = std::max(axis_power[k], 1e-12);
      worst_bin = std::max(worst_bin,
                           std::abs(std::norm(spec_out[k]) - axis_power[k]) / denom);
    }
  }

  // degenerate single-axis case against a naive DFT oracle
  Eigen::MatrixXd single = Eigen::MatrixXd::Zero(64, 3);
  for (int i = 0; i < 64; ++i) single(i, 0) = rng.normal();
  const auto deg = signal::dft321(signal::make_series(single, 1000.0));
  const auto want = naive_dft(single.col(0));
  const auto got = naive_dft(deg.samples.col(0));
  double worst_deg = 0.0;
  for (int k = 0; k < 64; ++k)
    worst_deg = std::max(worst_deg, std::abs(std::abs(got[k]) - std::abs(want[k])) /
                                        std::max(1e-12, std::abs(want[k])));

  const bool ok = worst_energy <= 1e-9 && worst_bin <= 1e-9 && worst_deg <= 1e-9;
  report(2, "dft321 identities", ok,
         fmt("energy %.2e, per-bin %.2e, degenerate %.2e (<=1e-9, 100 trials)",
             worst_energy, worst_bin, worst_deg));
}

// --------------------------------------------------------------------------
// 3. feature shape contract

void criterion_feature_shapes() {
  const tactile::MfccExtractor mfcc;
  Eigen::VectorXd seg(500);
  for (int i = 0; i < 500; ++i) seg[i] = std::sin(2.0 * M_PI * 90.0 * i / 1000.0);
  const auto coeffs = mfcc.compute(seg);

  const auto features = tactile::segment_features(seg, Eigen::VectorXd::Constant(500, 0.1),
                                                  Eigen::VectorXd::Constant(500, 1.2), mfcc);

  vision::GrayImage img(1568, 1568);
  for (int r = 0; r < 1568; ++r)
    for (int c = 0; c < 1568; ++c)
      img(r, c) = static_cast<uint8_t>((r * 7 + c * 13 + (r * c) % 31) % 256);
  const vision::FallbackDeepExtractor fx(42);
  const auto image_vec = vision::image_feature_vector(img, fx, "tex");

  const bool ok = coeffs.rows() == 40 && coeffs.cols() == 13 && features.size() == 526 &&
                  image_vec.values.size() == 2304;
  report(3, "feature shape contract", ok,
         fmt("mfcc %ldx%ld (=40x13), tactile %ld (=526), image %ld (=2304)",
             long(coeffs.rows()), long(coeffs.cols()), long(features.size()),
             long(image_vec.values.size())));
}

// --------------------------------------------------------------------------
// 4. metric oracles

void criterion_metrics() {
  Rng rng(404);
  double worst = 0.0;
  bool order_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.uniform_int(1, 50);
    Eigen::VectorXd y(n), y_hat(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform(0.0, 100.0);
      y_hat[i] = rng.uniform(0.0, 100.0);
    }
    double brute_mae = 0.0, brute_sq = 0.0;
    for (int i = n - 1; i >= 0; --i) {
      brute_mae += std::abs(y[i] - y_hat[i]);
      brute_sq += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    }
    brute_mae /= n;
    const double brute_rmse = std::sqrt(brute_sq / n);
    const double m = eval::mae(y, y_hat);
    const double r = eval::rmse(y, y_hat);
    worst = std::max({worst, std::abs(m - brute_mae), std::abs(r - brute_rmse)});
    if (m > r + 1e-12) order_ok = false;
  }

  double worst_affine = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.uniform_int(1, 20);
    Eigen::VectorXd y(n), y_hat(n), ys(n), ys_hat(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.uniform(-100.0, 100.0);
      y_hat[i] = rng.uniform(-100.0, 100.0);
      ys[i] = eval::rescale_to_0_100(y[i]);
      ys_hat[i] = eval::rescale_to_0_100(y_hat[i]);
    }
    worst_affine = std::max(
        worst_affine, std::abs(eval::mae(ys, ys_hat) - eval::mae(y, y_hat) / 2.0));
  }

  const bool ok = worst <= 1e-12 && order_ok && worst_affine <= 1e-12;
  report(4, "metric oracle", ok,
         fmt("brute-force dev %.2e (<=1e-12), MAE<=RMSE %s, affine identity %.2e",
             worst, order_ok ? "held" : "VIOLATED", worst_affine));
}

// --------------------------------------------------------------------------
// 5. architecture dimension trace

void criterion_architecture() {
  model::HvNetConfig hv_cfg;  // full-size defaults
  model::HvNet hv(hv_cfg);
  const bool enc_ok = hv.encoder_lengths() == std::vector<int>{1152, 576, 288, 144, 72};

  model::HtNetConfig ht_cfg;
  ht_cfg.input_dim = 16;  // spatial length immaterial to the time trace
  model::HtNet ht(ht_cfg);
  const bool time_ok = ht.time_trace() == std::vector<int>{8, 8, 4, 4, 2, 1, 1};
  const bool out_ok = ht.output_dim() == 128;

  model::FusionConfig fu_cfg;
  model::FusionHead fusion(fu_cfg, 128, 128);
  const auto y = fusion.forward(model::Vector::Zero(128), model::Vector::Zero(128));

  const bool ok = enc_ok && time_ok && out_ok && y.size() == 4;
  report(5, "architecture dimensions", ok,
         fmt("encoder 2304->1152->576->288->144->72 %s, time 8->4->2->1 %s, "
             "tactile 128-d %s, fusion 4-d %s",
             enc_ok ? "ok" : "BAD", time_ok ? "ok" : "BAD", out_ok ? "ok" : "BAD",
             y.size() == 4 ? "ok" : "BAD"));
}

// --------------------------------------------------------------------------
// 6. training protocol

void criterion_training_protocol() {
  // patience walk-through
  const double vals[] = {5, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4};
  model::EarlyStopper stopper(10);
  int stopped_at = 0;
  for (int e = 1; e <= 12 && stopped_at == 0; ++e)
    if (stopper.observe(e, vals[e - 1])) stopped_at = e;
  const bool walkthrough_ok = stopped_at == 12 && stopper.best_epoch() == 2;

  // max-epoch cap and best-parameter restoration on a miniature model
  model::ModelConfig cfg;
  cfg.hv.input_dim = 32;
  cfg.hv.encoder_filters = {4, 4, 2, 2, 2};
  cfg.hv.encoder_kernels = {4, 4, 3, 3, 3};
  cfg.hv.feature_hidden = 8;
  cfg.hv.feature_dim = 8;
  cfg.ht.input_dim = 32;
  cfg.ht.filters = {4, 4, 4, 4, 4, 4};
  cfg.fusion.hidden1 = 8;
  cfg.fusion.hidden2 = 8;
  cfg.fusion.hidden3 = 4;

  model::TrainingSet data;
  Rng rng(606);
  for (int t = 0; t < 3; ++t) {
    model::TextureData tx;
    tx.id = "t" + std::to_string(t);
    for (int a = 0; a < 4; ++a) tx.target[a] = rng.uniform(-100.0, 100.0);
    for (int s = 0; s < 6; ++s) {
      model::Matrix seq(8, 32);
      for (Eigen::Index i = 0; i < seq.size(); ++i)
        seq.data()[i] = 0.01 * tx.target[i % 4] + 0.05 * rng.normal();
      tx.sequences.push_back(seq);
    }
    tx.image_variants.resize(2, 32);
    for (Eigen::Index i = 0; i < tx.image_variants.size(); ++i)
      tx.image_variants.data()[i] = rng.normal();
    data.textures.push_back(std::move(tx));
  }

  model::VisuoTactileModel capped(cfg, 1);
  model::TrainConfig tc;
  tc.max_epochs = 1;
  tc.patience = 10;
  tc.batch_size = 4;
  tc.seed = 3;
  const auto one = model::train(capped, data, {0, 1, 2}, tc);
  const bool cap_ok = one.epochs_run == 1;

  model::VisuoTactileModel best_model(cfg, 2);
  tc.max_epochs = 200;
  tc.patience = 4;
  const auto longer = model::train(best_model, data, {0, 1, 2}, tc);
  double best_seen = std::numeric_limits<double>::infinity();
  for (const auto& row : longer.history) best_seen = std::min(best_seen, row.val_loss);
  const bool restore_ok =
      longer.best_val_loss == best_seen &&
      (longer.epochs_run == longer.best_epoch + tc.patience ||
       longer.epochs_run == tc.max_epochs);

  const bool ok = walkthrough_ok && cap_ok && restore_ok;
  report(6, "training protocol", ok,
         fmt("patience walk-through %s (stop@%d best@%d), cap %s, "
             "best-restore %s (ran %d, best %d)",
             walkthrough_ok ? "ok" : "BAD", stopped_at, stopper.best_epoch(),
             cap_ok ? "ok" : "BAD", restore_ok ? "ok" : "BAD", longer.epochs_run,
             longer.best_epoch));
}

// --------------------------------------------------------------------------
// 7 + 8. end-to-end learnability and determinism

model::RunConfig acceptance_run_config() {
  model::RunConfig cfg;
  cfg.model.hv.encoder_filters = {32, 32, 16, 8, 8};
  cfg.model.hv.encoder_kernels = {4, 4, 3, 3, 3};
  cfg.model.ht.filters = {16, 16, 16, 16, 16, 16};
  cfg.train.max_epochs = 20;
  cfg.train.patience = 10;
  cfg.train.batch_size = 1;
  cfg.train.lr = 1e-3;
  cfg.train.recon_weight = 0.1;
  cfg.sequence_len = 8;
  cfg.sequence_stride = 24;
  cfg.model.ht.seq_len = 8;
  return cfg;
}

void criteria_learnability_and_determinism(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();

  const fs::path dataset_dir = work / "synth12";
  data::SynthConfig synth_cfg;
  synth_cfg.seed = 7;
  synth_cfg.n_textures = 12;
  synth_cfg.duration_s = 60.0;  // 55 s after cropping
  data::synth_generate(dataset_dir.string(), synth_cfg);
  pipeline::prepare_dataset((dataset_dir / "manifest.json").string());

  const auto cfg = acceptance_run_config();
  const auto data = data::load_training_set((dataset_dir / "manifest.json").string(),
                                            cfg.sequence_len, cfg.sequence_stride);

  eval::LoocvOptions opts;
  opts.seed = 7;
  opts.jobs = 4;
  const auto parallel = eval::loocv(data, cfg, opts);

  const fs::path run_a = work / "run_jobs4";
  fs::create_directories(run_a);
  eval::write_aggregate_csv((run_a / "aggregate_report.csv").string(), parallel.aggregate);
  eval::write_fold_csv((run_a / "folds.csv").string(), parallel.folds);
  eval::heatmap_export((run_a / "heatmap.csv").string(), parallel.folds);

  const double elapsed = seconds_since(t0);
  int attributes_beating = 0;
  std::string detail;
  for (int a = 0; a < 4; ++a) {
    const bool beat =
        parallel.aggregate.mae[a] <= 0.7 * parallel.aggregate.baseline_mae[a];
    if (beat) ++attributes_beating;
    detail += fmt("%s %.2f/%.2f%s ", data::kAttributeNames[a], parallel.aggregate.mae[a],
                  parallel.aggregate.baseline_mae[a], beat ? "*" : "");
  }
  const bool learn_ok = attributes_beating >= 3 && parallel.aggregate.failed_folds == 0 &&
                        elapsed < 1800.0;
  report(7, "end-to-end learnability", learn_ok,
         fmt("mae/baseline: %s-> %d/4 attributes 30%% under baseline, %.0f s (<1800)",
             detail.c_str(), attributes_beating, elapsed));

  // determinism: a fresh serial run must reproduce the parallel run's bytes
  opts.jobs = 1;
  const auto serial = eval::loocv(data, cfg, opts);
  const fs::path run_b = work / "run_jobs1";
  fs::create_directories(run_b);
  eval::write_aggregate_csv((run_b / "aggregate_report.csv").string(), serial.aggregate);
  eval::write_fold_csv((run_b / "folds.csv").string(), serial.folds);
  eval::heatmap_export((run_b / "heatmap.csv").string(), serial.folds);

  const bool agg_same =
      slurp(run_a / "aggregate_report.csv") == slurp(run_b / "aggregate_report.csv");
  const bool folds_same = slurp(run_a / "folds.csv") == slurp(run_b / "folds.csv");
  const bool heat_same = slurp(run_a / "heatmap.csv") == slurp(run_b / "heatmap.csv");
  report(8, "determinism across jobs", agg_same && folds_same && heat_same,
         fmt("aggregate %s, folds %s, heatmap %s (jobs=4 vs jobs=1)",
             agg_same ? "identical" : "DIFFER", folds_same ? "identical" : "DIFFER",
             heat_same ? "identical" : "DIFFER"));
}

// --------------------------------------------------------------------------
// 9. format round-trips and golden layouts

bool check_golden(const fs::path& golden, const Eigen::VectorXd& values, double tol) {
  std::ifstream in(golden);
  if (!in.good()) return false;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    double want = 0.0;
    if (!(in >> want)) return false;
    if (std::abs(values[i] - want) > tol * std::max(1.0, std::abs(want))) return false;
  }
  return true;
}

void criterion_formats(const fs::path& work) {
  Rng rng(909);

  // checkpoint round trip
  nn::CheckpointData ckpt;
  ckpt.meta = {{"model_type", "visuotactile"}, {"seed", 5}, {"epoch", 3}};
  nn::Matrix w(7, 5);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  ckpt.tensors.emplace_back("layer/w", w);
  ckpt.tensors.emplace_back("layer/b", nn::Matrix::Zero(7, 1));
  const fs::path ck_a = work / "ck_a.hapt", ck_b = work / "ck_b.hapt";
  nn::save_checkpoint(ck_a.string(), ckpt);
  nn::save_checkpoint(ck_b.string(), nn::load_checkpoint(ck_a.string()));
  const bool ckpt_ok = !slurp(ck_a).empty() && slurp(ck_a) == slurp(ck_b);

  // feature container round trip
  Eigen::MatrixXf feats(21, 526);
  for (Eigen::Index i = 0; i < feats.size(); ++i)
    feats.data()[i] = static_cast<float>(rng.normal());
  const fs::path ft_a = work / "ft_a.htft", ft_b = work / "ft_b.htft";
  io::write_feature_file(ft_a.string(), "HTFT", feats);
  io::write_feature_file(ft_b.string(), "HTFT", io::read_feature_file(ft_a.string(), "HTFT"));
  const bool feats_ok = slurp(ft_a) == slurp(ft_b);

  // manifest round trip
  data::Manifest manifest;
  for (int i = 0; i < 5; ++i) {
    data::ManifestEntry e;
    e.texture_id = "T0" + std::to_string(i + 1);
    e.class_label = data::synth_class_labels()[i];
    manifest.textures.push_back(e);
  }
  const fs::path mf_a = work / "manifest_a.json", mf_b = work / "manifest_b.json";
  data::save_manifest(mf_a.string(), manifest);
  data::save_manifest(mf_b.string(), data::load_manifest(mf_a.string()));
  const bool manifest_ok = slurp(mf_a) == slurp(mf_b);

  // golden tactile layout (526 entries, frozen file)
  const tactile::MfccExtractor mfcc;
  Eigen::VectorXd a(500), v(500), f(500);
  for (int i = 0; i < 500; ++i) {
    a[i] = std::sin(2.0 * M_PI * 40.0 * i / 1000.0) +
           0.5 * std::sin(2.0 * M_PI * 230.0 * i / 1000.0 + 0.3);
    v[i] = 0.1 + 0.05 * std::sin(2.0 * M_PI * 1.0 * i / 1000.0);
    f[i] = 1.5 + 0.2 * std::cos(2.0 * M_PI * 0.7 * i / 1000.0);
  }
  const auto tactile_vec = tactile::segment_features(a, v, f, mfcc);
  const bool tactile_golden_ok =
      check_golden(fs::path(HAPTEX_GOLDEN_DIR) / "tactile_layout.txt", tactile_vec, 1e-9);

  // golden image layout (2304 entries, frozen file)
  vision::GrayImage img(1568, 1568);
  for (int r = 0; r < 1568; ++r)
    for (int c = 0; c < 1568; ++c)
      img(r, c) = static_cast<uint8_t>((r * 7 + c * 13 + (r * c) % 31) % 256);
  const vision::FallbackDeepExtractor fx(42);
  const auto image_vec = vision::image_feature_vector(img, fx, "tex");
  const bool image_golden_ok =
      check_golden(fs::path(HAPTEX_GOLDEN_DIR) / "image_layout.txt", image_vec.values, 1e-9);

  // golden HPS export column order
  std::vector<data::AttributeRatings> ratings;
  ratings.push_back({"tex1", "wood", {10, -20, 30, 40}});
  const fs::path hps = work / "hps.csv";
  data::hps_export(hps.string(), ratings);
  const auto hps_bytes = slurp(hps);
  const std::string hps_want =
      "texture_id,x_hs,y_fb,size_rs,color_ss,class\ntex1,40,-20,10,30,wood\n";
  const bool hps_ok = std::string(hps_bytes.begin(), hps_bytes.end()) == hps_want;

  const bool ok =
      ckpt_ok && feats_ok && manifest_ok && tactile_golden_ok && image_golden_ok && hps_ok;
  report(9, "format round-trips", ok,
         fmt("checkpoint %s, features %s, manifest %s, tactile golden %s, image golden %s, "
             "hps golden %s",
             ckpt_ok ? "ok" : "BAD", feats_ok ? "ok" : "BAD", manifest_ok ? "ok" : "BAD",
             tactile_golden_ok ? "ok" : "BAD", image_golden_ok ? "ok" : "BAD",
             hps_ok ? "ok" : "BAD"));
}

// --------------------------------------------------------------------------
// 10. ratings pipeline

void criterion_ratings() {
  std::vector<data::ParticipantRating> rows;
  rows.push_back({"P1", "mid", {50, 50, 50, 50}});
  rows.push_back({"P1", "ends", {100, 0, 20, 80}});
  rows.push_back({"P2", "ends", {100, 0, 80, 20}});
  const auto agg = data::aggregate_ratings(rows);
  bool agg_ok = agg.size() == 2;
  for (const auto& r : agg) {
    if (r.texture_id == "mid") agg_ok = agg_ok && r.values == Eigen::Vector4d(0, 0, 0, 0);
    if (r.texture_id == "ends")
      agg_ok = agg_ok && r.values == Eigen::Vector4d(100, -100, 0, 0);
  }

  std::vector<data::AdjectiveMark> marks;
  for (int p = 0; p < 26; ++p)
    for (int t = 0; t < 3; ++t) {
      marks.push_back({"P" + std::to_string(p), "T" + std::to_string(t), "always", 1});
      marks.push_back({"P" + std::to_string(p), "T" + std::to_string(t), "half",
                       p < 13 ? 1 : 0});
      marks.push_back({"P" + std::to_string(p), "T" + std::to_string(t), "rare",
                       p == 0 ? 1 : 0});
      marks.push_back({"P" + std::to_string(p), "T" + std::to_string(t), "never", 0});
    }
  const auto kept = data::relevance_filter(marks, 0.5);
  const bool rel_ok = kept == std::vector<std::string>{"always", "half"};

  report(10, "ratings pipeline", agg_ok && rel_ok,
         fmt("aggregation %s, 50%%-relevance rule %s", agg_ok ? "ok" : "BAD",
             rel_ok ? "ok" : "BAD"));
}

}  // namespace

int main() {
  const fs::path work = fs::current_path() / "acceptance_work";
  fs::remove_all(work);
  fs::create_directories(work);

  const auto t0 = std::chrono::steady_clock::now();
  criterion_gradients();
  criterion_dft321();
  criterion_feature_shapes();
  criterion_metrics();
  criterion_architecture();
  criterion_training_protocol();
  criteria_learnability_and_determinism(work);
  criterion_formats(work);
  criterion_ratings();

  std::printf("ACCEPTANCE: %d/%d criteria passed (%.0f s total)\n", g_passed,
              g_passed + g_failed, seconds_since(t0));
  return g_failed == 0 ? 0 : 1;
}
