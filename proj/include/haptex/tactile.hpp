#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "haptex/errors.hpp"

namespace haptex::tactile {

// Symmetric Hann window, endpoints zero.
Eigen::VectorXd hann(int n);

struct MfccConfig {
  int segment_len = 500;   // samples at 1 kHz
  int frame_len = 25;      // 25 ms frames
  int frame_hop = 12;      // 50% overlap rounded down; first n_frames kept
  int n_frames = 40;
  int fft_size = 32;
  int n_filters = 26;
  int n_coeffs = 13;
  double fmin_hz = 0.0;
  double fmax_hz = 500.0;
  double rate_hz = 1000.0;
  double log_floor = 1e-10;

  uint64_t hash() const;
};

// Mel-frequency cepstral coefficients of a fixed-length segment.
//
// Per frame: Hann window, zero-pad to fft_size, power spectrum over the
// nonnegative bins, triangular mel filterbank (bin cells integrated so every
// filter row carries weight even below the bin spacing), floored log,
// orthonormal DCT-II, first n_coeffs coefficients kept (c0 included).
class MfccExtractor {
 public:
  explicit MfccExtractor(MfccConfig cfg = {});

  const MfccConfig& config() const { return cfg_; }

  // n_bins = fft_size/2 + 1
  const Eigen::MatrixXd& filterbank() const { return mel_weights_; }  // n_filters x n_bins
  const Eigen::VectorXd& filter_centers_hz() const { return centers_hz_; }

  // segment: segment_len samples -> n_frames x n_coeffs matrix
  Eigen::MatrixXd compute(const Eigen::VectorXd& segment) const;

  // Pre-log filter energies per frame (n_frames x n_filters); used by tests.
  Eigen::MatrixXd filter_energies(const Eigen::VectorXd& segment) const;

 private:
  MfccConfig cfg_;
  Eigen::VectorXd window_;
  Eigen::MatrixXd mel_weights_;
  Eigen::VectorXd centers_hz_;
  Eigen::MatrixXd dct_;  // n_coeffs x n_filters, orthonormal DCT-II rows
};

// (min, max, mean) of a segment.
Eigen::Vector3d stats3(const Eigen::VectorXd& segment);

// 526-entry tactile feature vector: flattened MFCC (frame-major), then speed
// stats (min, max, mean), then force stats (min, max, mean).
Eigen::VectorXd segment_features(const Eigen::VectorXd& a_seg, const Eigen::VectorXd& v_seg,
                                 const Eigen::VectorXd& f_seg,
                                 const MfccExtractor& mfcc);

inline constexpr int kTactileFeatureDim = 526;

struct SegmentSequence {
  std::string texture_id;
  Eigen::MatrixXd steps;  // S x feature_dim, consecutive segments
};

// Groups consecutive per-segment feature vectors into fixed-length sequences
// starting at 0, stride, 2*stride, ...
std::vector<SegmentSequence> build_sequences(const std::vector<Eigen::VectorXd>& segments,
                                             int s, int stride,
                                             const std::string& texture_id);

}  // namespace haptex::tactile
