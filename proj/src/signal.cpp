#include "haptex/signal.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

namespace haptex::signal {

using Cplx = std::complex<double>;

void validate(const TimeSeries& ts, const std::string& context) {
  if (ts.rate_hz <= 0.0) throw IngestError(context + ": sample rate must be positive");
  if (ts.samples.rows() < 1) throw IngestError(context + ": empty series");
  if (!ts.samples.allFinite()) throw IngestError(context + ": non-finite samples");
}

TimeSeries make_series(Eigen::MatrixXd samples, double rate_hz, const std::string& context) {
  TimeSeries ts{std::move(samples), rate_hz};
  validate(ts, context);
  return ts;
}

TimeSeries resample(const TimeSeries& ts, double target_hz) {
  validate(ts, "resample");
  if (target_hz <= 0.0) throw ArgError("resample: target rate must be positive");
  if (target_hz == ts.rate_hz) return ts;

  const Eigen::Index n_in = ts.length();
  const Eigen::Index n_out =
      std::max<Eigen::Index>(1, std::llround(static_cast<double>(n_in) * target_hz / ts.rate_hz));

  Eigen::MatrixXd out(n_out, ts.channels());
  const double step = ts.rate_hz / target_hz;  // source samples per output sample
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const double pos = static_cast<double>(k) * step;
    const auto i0 = static_cast<Eigen::Index>(pos);
    if (i0 >= n_in - 1) {
      out.row(k) = ts.samples.row(n_in - 1);
    } else {
      const double frac = pos - static_cast<double>(i0);
      out.row(k) = (1.0 - frac) * ts.samples.row(i0) + frac * ts.samples.row(i0 + 1);
    }
  }
  return TimeSeries{std::move(out), target_hz};
}

TimeSeries crop_ends(const TimeSeries& ts, double crop_s) {
  validate(ts, "crop_ends");
  if (crop_s < 0.0) throw ArgError("crop_ends: negative crop");
  const auto crop_n = static_cast<Eigen::Index>(std::llround(crop_s * ts.rate_hz));
  if (crop_n == 0) return ts;
  if (2 * crop_n >= ts.length())
    throw CropError("crop_ends: series shorter than twice the crop interval");
  TimeSeries out;
  out.rate_hz = ts.rate_hz;
  out.samples = ts.samples.middleRows(crop_n, ts.length() - 2 * crop_n);
  return out;
}

// ---------------------------------------------------------------------------
// Butterworth design

namespace {

// Left-half-plane poles of the analog Butterworth prototype, |s| = 1.
std::vector<Cplx> prototype_poles(int order) {
  std::vector<Cplx> poles;
  poles.reserve(order);
  for (int k = 0; k < order; ++k) {
    const double theta = M_PI * (2.0 * k + order + 1.0) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

Cplx bilinear(Cplx s, double fs2) { return (fs2 + s) / (fs2 - s); }

// Pair each pole with its (closest) conjugate partner into biquad
// denominators. Poles are expected conjugate-complete.
std::vector<std::pair<Cplx, Cplx>> conjugate_pairs(std::vector<Cplx> poles) {
  std::vector<std::pair<Cplx, Cplx>> pairs;
  std::vector<bool> used(poles.size(), false);
  for (size_t i = 0; i < poles.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    size_t best = poles.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t j = i + 1; j < poles.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(poles[j] - std::conj(poles[i]));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best == poles.size() || best_dist > 1e-6 * (1.0 + std::abs(poles[i])))
      throw FilterError("butterworth: unpaired complex pole");
    used[best] = true;
    pairs.emplace_back(poles[i], poles[best]);
  }
  return pairs;
}

Cplx biquad_response(const Biquad& s, Cplx z1) {
  // z1 = z^-1
  const Cplx z2 = z1 * z1;
  return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

}  // namespace

std::complex<double> ZeroPhaseFilter::response(double hz, double rate_hz) const {
  const Cplx z1 = std::exp(Cplx(0.0, -2.0 * M_PI * hz / rate_hz));
  Cplx h(1.0, 0.0);
  for (const auto& s : sections) h *= biquad_response(s, z1);
  return h;
}

ZeroPhaseFilter butter_lowpass(int order, double cutoff_hz, double rate_hz) {
  if (order < 1) throw FilterError("butter_lowpass: order must be >= 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < rate_hz / 2.0))
    throw FilterError("butter_lowpass: cutoff must lie in (0, Nyquist)");

  const double fs2 = 2.0 * rate_hz;
  const double warped = fs2 * std::tan(M_PI * cutoff_hz / rate_hz);

  std::vector<Cplx> zpoles;
  for (Cplx p : prototype_poles(order)) zpoles.push_back(bilinear(p * warped, fs2));

  ZeroPhaseFilter f;
  f.order = order;
  for (const auto& [p, q] : conjugate_pairs(std::move(zpoles))) {
    Biquad s{};
    s.a1 = -(p + q).real();
    s.a2 = (p * q).real();
    // zeros at z = -1; normalize each section to unit DC gain
    const double dc = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = dc;
    s.b1 = 2.0 * dc;
    s.b2 = dc;
    f.sections.push_back(s);
  }
  return f;
}

ZeroPhaseFilter butter_bandpass(int order, double lo_hz, double hi_hz, double rate_hz) {
  if (order < 1) throw FilterError("butter_bandpass: order must be >= 1");
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz <= rate_hz / 2.0))
    throw FilterError("butter_bandpass: band must satisfy 0 < lo < hi <= Nyquist");

  const double fs2 = 2.0 * rate_hz;
  // Prewarping sends an edge at exactly Nyquist to infinity; pull it just
  // inside so the design stays well conditioned. The passband change is
  // confined to the top 0.1% of the band.
  const double hi_eff = std::min(hi_hz, rate_hz / 2.0 * 0.999);
  const double wl = fs2 * std::tan(M_PI * lo_hz / rate_hz);
  const double wh = fs2 * std::tan(M_PI * hi_eff / rate_hz);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // LP->BP: each prototype pole q solves s^2 - bw*q*s + w0^2 = 0.
  std::vector<Cplx> spoles;
  for (Cplx q : prototype_poles(order)) {
    const Cplx bq = bw * q;
    const Cplx disc = std::sqrt(bq * bq * 0.25 - w0 * w0);
    spoles.push_back(bq * 0.5 + disc);
    spoles.push_back(bq * 0.5 - disc);
  }

  std::vector<Cplx> zpoles;
  for (Cplx p : spoles) zpoles.push_back(bilinear(p, fs2));

  ZeroPhaseFilter f;
  f.order = 2 * order;
  for (const auto& [p, q] : conjugate_pairs(std::move(zpoles))) {
    Biquad s{};
    s.a1 = -(p + q).real();
    s.a2 = (p * q).real();
    // one zero at z=+1 and one at z=-1 per section: (1 - z^-2)
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    f.sections.push_back(s);
  }

  // Normalize to unit gain at the (digital) center frequency.
  const double center_hz = std::atan(w0 / fs2) * rate_hz / M_PI;
  const double mag = std::abs(f.response(center_hz, rate_hz));
  if (mag <= 0.0) throw FilterError("butter_bandpass: degenerate response");
  const double g = 1.0 / mag;
  f.sections.front().b0 *= g;
  f.sections.front().b1 *= g;
  f.sections.front().b2 *= g;
  return f;
}

namespace {

void biquad_inplace(const Biquad& s, Eigen::VectorXd& x) {
  // direct form II transposed; state starts at the steady-state response to a
  // step of the first sample's height, so constants pass through exactly
  const double x0 = x[0];
  const double denom = 1.0 + s.a1 + s.a2;
  const double y0 = std::abs(denom) > 1e-300
                        ? x0 * (s.b0 + s.b1 + s.b2) / denom
                        : 0.0;
  double z2 = s.b2 * x0 - s.a2 * y0;
  double z1 = s.b1 * x0 - s.a1 * y0 + z2;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double in = x[i];
    const double out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    x[i] = out;
  }
}

}  // namespace

Eigen::VectorXd filtfilt(const ZeroPhaseFilter& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::Index pad = 3 * f.order;
  if (n < 2) return x;
  const Eigen::Index p = std::min<Eigen::Index>(pad, n - 1);

  // odd reflection about the end points
  Eigen::VectorXd ext(n + 2 * p);
  for (Eigen::Index i = 0; i < p; ++i) ext[i] = 2.0 * x[0] - x[p - i];
  ext.segment(p, n) = x;
  for (Eigen::Index i = 0; i < p; ++i) ext[p + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  for (const auto& s : f.sections) biquad_inplace(s, ext);
  ext.reverseInPlace();
  for (const auto& s : f.sections) biquad_inplace(s, ext);
  ext.reverseInPlace();

  return ext.segment(p, n);
}

namespace {

TimeSeries filter_channels(const ZeroPhaseFilter& f, const TimeSeries& ts) {
  Eigen::MatrixXd out(ts.length(), ts.channels());
  for (Eigen::Index c = 0; c < ts.channels(); ++c)
    out.col(c) = filtfilt(f, ts.samples.col(c));
  return TimeSeries{std::move(out), ts.rate_hz};
}

}  // namespace

TimeSeries lowpass(const TimeSeries& ts, double cutoff_hz) {
  validate(ts, "lowpass");
  if (!(cutoff_hz > 0.0 && cutoff_hz < ts.rate_hz / 2.0))
    throw FilterError("lowpass: cutoff must lie below Nyquist");
  return filter_channels(butter_lowpass(4, cutoff_hz, ts.rate_hz), ts);
}

TimeSeries bandpass(const TimeSeries& ts, double lo_hz, double hi_hz) {
  validate(ts, "bandpass");
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz <= ts.rate_hz / 2.0))
    throw FilterError("bandpass: invalid band");
  return filter_channels(butter_bandpass(4, lo_hz, hi_hz, ts.rate_hz), ts);
}

TimeSeries dft321(const TimeSeries& accel_xyz) {
  validate(accel_xyz, "dft321");
  if (accel_xyz.channels() != 3) throw ShapeError("dft321: expected 3 channels");

  const Eigen::Index n = accel_xyz.length();
  Eigen::FFT<double> fft;

  std::vector<std::vector<Cplx>> spectra(3);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> col(accel_xyz.samples.col(c).data(),
                            accel_xyz.samples.col(c).data() + n);
    fft.fwd(spectra[c], col);
  }

  std::vector<Cplx> combined(n);
  const Eigen::Index half = n / 2;
  for (Eigen::Index k = 0; k <= half; ++k) {
    const Cplx sum = spectra[0][k] + spectra[1][k] + spectra[2][k];
    const double mag = std::sqrt(std::norm(spectra[0][k]) + std::norm(spectra[1][k]) +
                                 std::norm(spectra[2][k]));
    Cplx v = std::polar(mag, std::arg(sum));
    if (k == 0 || (n % 2 == 0 && k == half)) v = Cplx(v.real(), 0.0);
    combined[k] = v;
    if (k > 0 && k < n - k) combined[n - k] = std::conj(v);
  }

  std::vector<double> out;
  fft.inv(out, combined);

  Eigen::MatrixXd m(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) m(i, 0) = out[i];
  return TimeSeries{std::move(m), accel_xyz.rate_hz};
}

TimeSeries speed_magnitude(const TimeSeries& velocity_xyz) {
  validate(velocity_xyz, "speed_magnitude");
  if (velocity_xyz.channels() != 3) throw ShapeError("speed_magnitude: expected 3 channels");
  Eigen::MatrixXd out(velocity_xyz.length(), 1);
  out.col(0) = velocity_xyz.samples.rowwise().norm();
  return TimeSeries{std::move(out), velocity_xyz.rate_hz};
}

TimeSeries normal_force(const TimeSeries& force_xyz, const Eigen::Vector3d& normal) {
  validate(force_xyz, "normal_force");
  if (force_xyz.channels() != 3) throw ShapeError("normal_force: expected 3 channels");
  if (std::abs(normal.norm() - 1.0) > 1e-6)
    throw NormalError("normal_force: surface normal must have unit length");
  Eigen::MatrixXd out(force_xyz.length(), 1);
  out.col(0) = force_xyz.samples * normal;
  return TimeSeries{std::move(out), force_xyz.rate_hz};
}

std::vector<Eigen::MatrixXd> segment(const TimeSeries& ts, int window_samples,
                                     int hop_samples) {
  validate(ts, "segment");
  if (window_samples < 1 || hop_samples < 1)
    throw ArgError("segment: window and hop must be positive");
  if (window_samples > ts.length())
    throw SegmentError("segment: window longer than the series");

  const Eigen::Index count = segment_count(ts.length(), window_samples, hop_samples);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  for (Eigen::Index i = 0; i < count; ++i)
    out.push_back(ts.samples.middleRows(i * hop_samples, window_samples));
  return out;
}

}  // namespace haptex::signal
