#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "haptex/errors.hpp"

namespace haptex::signal {

// Uniformly sampled signal. Rows are samples, columns are channels.
template <typename Scalar>
struct BasicTimeSeries {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix samples;
  Scalar rate_hz{0};

  Eigen::Index length() const { return samples.rows(); }
  Eigen::Index channels() const { return samples.cols(); }
  Scalar duration_s() const { return static_cast<Scalar>(samples.rows()) / rate_hz; }

  Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> channel(Eigen::Index c) const {
    return samples.col(c);
  }
};

using TimeSeries = BasicTimeSeries<double>;

// Throws IngestError unless the series is nonempty, finite and has a positive rate.
void validate(const TimeSeries& ts, const std::string& context);

TimeSeries make_series(Eigen::MatrixXd samples, double rate_hz,
                       const std::string& context = "series");

struct Recording {
  std::string texture_id;
  std::string class_label;
  TimeSeries accel;     // 3 channels, m/s^2
  TimeSeries force;     // 3 channels, N
  TimeSeries velocity;  // 3 channels, m/s
  Eigen::Vector3d surface_normal{0.0, 0.0, 1.0};
};

// Linear interpolation onto a uniform grid at target_hz. Duration is preserved
// within one output sample period; equal rates return the input bit-identically.
TimeSeries resample(const TimeSeries& ts, double target_hz);

// Drops crop_s seconds from each end; the interior block is contiguous.
TimeSeries crop_ends(const TimeSeries& ts, double crop_s);

// ---------------------------------------------------------------------------
// Zero-phase Butterworth filtering.
//
// Filters are designed as cascaded biquads via bilinear transform with
// frequency prewarping and applied forward-backward (filtfilt) with odd
// reflection padding of 3x the realized order.

struct Biquad {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator (a0 == 1)
};

struct ZeroPhaseFilter {
  std::vector<Biquad> sections;
  int order{0};  // realized pole count

  // Single-pass complex response at frequency hz (for analytic checks).
  std::complex<double> response(double hz, double rate_hz) const;
};

ZeroPhaseFilter butter_lowpass(int order, double cutoff_hz, double rate_hz);

// Band-pass from an order-n lowpass prototype; realizes 2n poles.
ZeroPhaseFilter butter_bandpass(int order, double lo_hz, double hi_hz, double rate_hz);

Eigen::VectorXd filtfilt(const ZeroPhaseFilter& f, const Eigen::VectorXd& x);

// 4th-order Butterworth low-pass, forward-backward, applied per channel.
TimeSeries lowpass(const TimeSeries& ts, double cutoff_hz);

// 4th-order prototype Butterworth band-pass, forward-backward, per channel.
TimeSeries bandpass(const TimeSeries& ts, double lo_hz, double hi_hz);

// ---------------------------------------------------------------------------

// Spectral three-to-one axis reduction: per-bin output magnitude squared is
// the sum of the three axis magnitudes squared; phase is taken from the
// spectral sum. Total energy equals the summed channel energies.
TimeSeries dft321(const TimeSeries& accel_xyz);

// Per-sample Euclidean norm of the three velocity channels.
TimeSeries speed_magnitude(const TimeSeries& velocity_xyz);

// Per-sample projection of 3-axis force onto the (unit) surface normal.
TimeSeries normal_force(const TimeSeries& force_xyz, const Eigen::Vector3d& normal);

// Fixed-length windows starting at 0, hop, 2*hop, ...; a trailing partial
// window is discarded. Windows preserve the channel count.
std::vector<Eigen::MatrixXd> segment(const TimeSeries& ts, int window_samples,
                                     int hop_samples);

inline Eigen::Index segment_count(Eigen::Index n, int window, int hop) {
  return (n - window) / hop + 1;
}

}  // namespace haptex::signal
