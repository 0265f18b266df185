#include "haptex/tactile.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

#include "haptex/rng.hpp"

namespace haptex::tactile {

Eigen::VectorXd hann(int n) {
  if (n < 2) throw ArgError("hann: need at least 2 points");
  Eigen::VectorXd w(n);
  // mirror the first half so w[k] == w[n-1-k] holds bit-exactly
  for (int k = 0; k <= (n - 1) / 2; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(2.0 * M_PI * k / (n - 1)));
    w[n - 1 - k] = w[k];
  }
  return w;
}

uint64_t MfccConfig::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "mfcc:%d:%d:%d:%d:%d:%d:%d:%.9g:%.9g:%.9g:%.9g",
                segment_len, frame_len, frame_hop, n_frames, fft_size, n_filters,
                n_coeffs, fmin_hz, fmax_hz, rate_hz, log_floor);
  return fnv1a64(buf);
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Mean of the triangle spanning [lo, peak, hi] over the interval [a, b].
double triangle_cell_mean(double lo, double peak, double hi, double a, double b) {
  if (b <= a) return 0.0;
  auto rising = [&](double x) { return (x - lo) / (peak - lo); };
  auto falling = [&](double x) { return (hi - x) / (hi - peak); };
  double area = 0.0;
  const double r0 = std::max(a, lo), r1 = std::min(b, peak);
  if (r1 > r0) area += 0.5 * (rising(r0) + rising(r1)) * (r1 - r0);
  const double f0 = std::max(a, peak), f1 = std::min(b, hi);
  if (f1 > f0) area += 0.5 * (falling(f0) + falling(f1)) * (f1 - f0);
  return area / (b - a);
}

}  // namespace

MfccExtractor::MfccExtractor(MfccConfig cfg) : cfg_(cfg) {
  if (cfg_.frame_len < 2 || cfg_.fft_size < cfg_.frame_len)
    throw ConfigError("mfcc: fft size must cover the frame");
  if ((cfg_.n_frames - 1) * cfg_.frame_hop + cfg_.frame_len > cfg_.segment_len)
    throw ConfigError("mfcc: frames exceed the segment");

  window_ = hann(cfg_.frame_len);

  const int n_bins = cfg_.fft_size / 2 + 1;
  const double bin_hz = cfg_.rate_hz / cfg_.fft_size;

  Eigen::VectorXd edges(cfg_.n_filters + 2);
  const double mel_lo = hz_to_mel(cfg_.fmin_hz);
  const double mel_hi = hz_to_mel(cfg_.fmax_hz);
  for (int i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg_.n_filters + 1));

  centers_hz_ = edges.segment(1, cfg_.n_filters);

  // Each bin contributes the mean of the triangle over its frequency cell,
  // so narrow low-frequency filters still pick up energy from coarse bins.
  mel_weights_.setZero(cfg_.n_filters, n_bins);
  for (int j = 0; j < cfg_.n_filters; ++j) {
    const double lo = edges[j], peak = edges[j + 1], hi = edges[j + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double cell_lo = std::max(cfg_.fmin_hz, (k - 0.5) * bin_hz);
      const double cell_hi = std::min(cfg_.fmax_hz, (k + 0.5) * bin_hz);
      const double a = std::max(cell_lo, lo);
      const double b = std::min(cell_hi, hi);
      if (b > a) mel_weights_(j, k) = triangle_cell_mean(lo, peak, hi, a, b);
    }
  }

  dct_.resize(cfg_.n_coeffs, cfg_.n_filters);
  const double norm0 = std::sqrt(1.0 / cfg_.n_filters);
  const double norm = std::sqrt(2.0 / cfg_.n_filters);
  for (int i = 0; i < cfg_.n_coeffs; ++i)
    for (int j = 0; j < cfg_.n_filters; ++j)
      dct_(i, j) = (i == 0 ? norm0 : norm) *
                   std::cos(M_PI * i * (2.0 * j + 1.0) / (2.0 * cfg_.n_filters));
}

Eigen::MatrixXd MfccExtractor::filter_energies(const Eigen::VectorXd& segment) const {
  if (segment.size() != cfg_.segment_len)
    throw ShapeError("mfcc: expected segment of " + std::to_string(cfg_.segment_len) +
                     " samples, got " + std::to_string(segment.size()));

  const int n_bins = cfg_.fft_size / 2 + 1;
  Eigen::FFT<double> fft;
  Eigen::MatrixXd energies(cfg_.n_frames, cfg_.n_filters);

  std::vector<double> frame(cfg_.fft_size, 0.0);
  std::vector<std::complex<double>> spec;
  for (int t = 0; t < cfg_.n_frames; ++t) {
    const int start = t * cfg_.frame_hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int i = 0; i < cfg_.frame_len; ++i)
      frame[i] = segment[start + i] * window_[i];
    fft.fwd(spec, frame);
    Eigen::VectorXd power(n_bins);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
    energies.row(t) = (mel_weights_ * power).transpose();
  }
  return energies;
}

Eigen::MatrixXd MfccExtractor::compute(const Eigen::VectorXd& segment) const {
  Eigen::MatrixXd energies = filter_energies(segment);
  Eigen::MatrixXd logs =
      energies.cwiseMax(cfg_.log_floor).array().log().matrix();
  return logs * dct_.transpose();  // n_frames x n_coeffs
}

Eigen::Vector3d stats3(const Eigen::VectorXd& segment) {
  if (segment.size() < 1) throw ArgError("stats3: empty segment");
  return {segment.minCoeff(), segment.maxCoeff(), segment.mean()};
}

Eigen::VectorXd segment_features(const Eigen::VectorXd& a_seg, const Eigen::VectorXd& v_seg,
                                 const Eigen::VectorXd& f_seg, const MfccExtractor& mfcc) {
  if (a_seg.size() != v_seg.size() || a_seg.size() != f_seg.size())
    throw ShapeError("segment_features: misaligned segment lengths");

  const Eigen::MatrixXd coeffs = mfcc.compute(a_seg);
  const auto n = coeffs.rows() * coeffs.cols();

  Eigen::VectorXd out(n + 6);
  // frame-major flattening: all 13 coefficients of frame 0, then frame 1, ...
  for (Eigen::Index t = 0; t < coeffs.rows(); ++t)
    out.segment(t * coeffs.cols(), coeffs.cols()) = coeffs.row(t);
  out.segment(n, 3) = stats3(v_seg);
  out.segment(n + 3, 3) = stats3(f_seg);
  return out;
}

std::vector<SegmentSequence> build_sequences(const std::vector<Eigen::VectorXd>& segments,
                                             int s, int stride,
                                             const std::string& texture_id) {
  if (s < 1 || stride < 1) throw ArgError("build_sequences: S and stride must be positive");
  const auto k = static_cast<int>(segments.size());
  if (k < s) throw SequenceError("build_sequences: fewer segments than sequence length");

  const int count = (k - s) / stride + 1;
  std::vector<SegmentSequence> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    SegmentSequence seq;
    seq.texture_id = texture_id;
    seq.steps.resize(s, segments[0].size());
    for (int j = 0; j < s; ++j) seq.steps.row(j) = segments[i * stride + j];
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace haptex::tactile
