#include "haptex/pipeline.hpp"

#include "haptex/dataset.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "haptex/csv.hpp"
#include "haptex/feature_file.hpp"

namespace haptex::pipeline {

namespace {

signal::TimeSeries channel_from_csv(const std::string& path) {
  const auto timed = io::read_timed_csv(path, 3);
  const Eigen::Index n = timed.t.size();
  if (n < 2) throw IngestError(path + ": need at least two samples");

  const double span = timed.t[n - 1] - timed.t[0];
  const double rate = static_cast<double>(n - 1) / span;
  // the resampler expects a uniform grid
  const double dt = 1.0 / rate;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double step = timed.t[i] - timed.t[i - 1];
    if (std::abs(step - dt) > 1e-4 * dt)
      throw IngestError(path + ": non-uniform sampling near row " + std::to_string(i + 1));
  }
  return signal::make_series(timed.values, rate, path);
}

}  // namespace

signal::Recording read_recording(const std::string& dir) {
  signal::Recording rec;
  rec.accel = channel_from_csv(dir + "/accel.csv");
  rec.force = channel_from_csv(dir + "/force.csv");
  rec.velocity = channel_from_csv(dir + "/kinematics.csv");

  std::ifstream meta_in(dir + "/meta.json");
  if (!meta_in) throw IngestError("missing meta.json in " + dir);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(dir + "/meta.json: " + e.what());
  }
  rec.texture_id = meta.value("texture_id", std::string{});
  rec.class_label = meta.value("class_label", std::string{});
  if (rec.texture_id.empty()) throw IngestError(dir + "/meta.json: texture_id required");
  if (meta.contains("surface_normal")) {
    const auto n = meta.at("surface_normal");
    if (!n.is_array() || n.size() != 3)
      throw IngestError(dir + "/meta.json: surface_normal must be a 3-vector");
    rec.surface_normal = Eigen::Vector3d(n[0].get<double>(), n[1].get<double>(),
                                         n[2].get<double>());
    const double norm = rec.surface_normal.norm();
    if (norm < 1e-12) throw IngestError(dir + "/meta.json: degenerate surface normal");
    rec.surface_normal /= norm;
  }
  return rec;
}

ProcessedRecording preprocess(const signal::Recording& rec, const PipelineConfig& cfg) {
  using namespace signal;

  TimeSeries accel = resample(rec.accel, cfg.target_hz);
  TimeSeries force = resample(rec.force, cfg.target_hz);
  TimeSeries velocity = resample(rec.velocity, cfg.target_hz);

  // resampling rounds independently per channel; align on the common length
  const Eigen::Index n = std::min({accel.length(), force.length(), velocity.length()});
  accel.samples.conservativeResize(n, 3);
  force.samples.conservativeResize(n, 3);
  velocity.samples.conservativeResize(n, 3);

  accel = crop_ends(accel, cfg.crop_s);
  force = crop_ends(force, cfg.crop_s);
  velocity = crop_ends(velocity, cfg.crop_s);

  accel = bandpass(accel, cfg.accel_band_lo_hz, cfg.accel_band_hi_hz);
  force = lowpass(force, cfg.interaction_lowpass_hz);
  velocity = lowpass(velocity, cfg.interaction_lowpass_hz);

  ProcessedRecording out;
  out.texture_id = rec.texture_id;
  out.class_label = rec.class_label;
  out.a = dft321(accel);
  out.v = speed_magnitude(velocity);
  out.f = normal_force(force, rec.surface_normal);
  return out;
}

void write_processed_csv(const std::string& path, const ProcessedRecording& rec) {
  const Eigen::Index n = rec.a.length();
  if (rec.v.length() != n || rec.f.length() != n)
    throw ShapeError("processed channels disagree in length");
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t[i] = static_cast<double>(i) / rec.a.rate_hz;
  Eigen::MatrixXd values(n, 3);
  values.col(0) = rec.a.samples.col(0);
  values.col(1) = rec.v.samples.col(0);
  values.col(2) = rec.f.samples.col(0);
  io::write_timed_csv(path, "t_s,a,v,f", t, values, 6);
}

ProcessedRecording read_processed_csv(const std::string& path) {
  const auto timed = io::read_timed_csv(path, 3);
  const Eigen::Index n = timed.t.size();
  if (n < 2) throw IngestError(path + ": too short");
  const double rate = static_cast<double>(n - 1) / (timed.t[n - 1] - timed.t[0]);
  ProcessedRecording out;
  out.a = signal::make_series(timed.values.col(0), rate, path);
  out.v = signal::make_series(timed.values.col(1), rate, path);
  out.f = signal::make_series(timed.values.col(2), rate, path);
  return out;
}

Eigen::MatrixXf extract_tactile_features(const ProcessedRecording& rec,
                                         const PipelineConfig& cfg,
                                         const tactile::MfccConfig& mfcc_cfg) {
  const auto a_segs = signal::segment(rec.a, cfg.segment_window, cfg.segment_hop);
  const auto v_segs = signal::segment(rec.v, cfg.segment_window, cfg.segment_hop);
  const auto f_segs = signal::segment(rec.f, cfg.segment_window, cfg.segment_hop);
  const size_t count = std::min({a_segs.size(), v_segs.size(), f_segs.size()});

  const tactile::MfccExtractor mfcc(mfcc_cfg);
  Eigen::MatrixXf rows(count, tactile::kTactileFeatureDim);
  for (size_t i = 0; i < count; ++i) {
    const Eigen::VectorXd features = tactile::segment_features(
        a_segs[i].col(0), v_segs[i].col(0), f_segs[i].col(0), mfcc);
    rows.row(i) = features.cast<float>().transpose();
  }
  return rows;
}

void write_tactile_features(const std::string& path, const std::string& texture_id,
                            const Eigen::MatrixXf& rows, int seq_len, int seq_stride,
                            const tactile::MfccConfig& mfcc_cfg) {
  io::write_feature_file(path, "HTFT", rows);
  nlohmann::json sidecar{{"texture_id", texture_id},
                         {"s", seq_len},
                         {"stride", seq_stride},
                         {"mfcc_config_hash", mfcc_cfg.hash()}};
  std::ofstream out(path + ".json");
  if (!out) throw FormatError("cannot write sidecar for " + path);
  out << sidecar.dump(2) << "\n";
}

void prepare_dataset(const std::string& manifest_path, const PipelineConfig& cfg,
                     int seq_len, int seq_stride, const tactile::MfccConfig& mfcc_cfg) {
  namespace fs = std::filesystem;
  data::Manifest manifest = data::load_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  fs::create_directories(base / "processed");
  fs::create_directories(base / "features");

  for (auto& entry : manifest.textures) {
    ProcessedRecording processed;
    bool have_processed = false;
    if (entry.processed_csv.empty()) {
      if (entry.raw_dir.empty())
        throw ManifestError("texture " + entry.texture_id +
                            " has neither raw data nor processed signals");
      auto rec = read_recording((base / entry.raw_dir).string());
      if (rec.texture_id != entry.texture_id)
        throw ManifestError("texture id mismatch between manifest and " + entry.raw_dir);
      processed = preprocess(rec, cfg);
      have_processed = true;
      entry.processed_csv = "processed/" + entry.texture_id + ".csv";
      write_processed_csv((base / entry.processed_csv).string(), processed);
    }
    if (entry.tactile_features.empty()) {
      if (!have_processed)
        processed = read_processed_csv((base / entry.processed_csv).string());
      const auto rows = extract_tactile_features(processed, cfg, mfcc_cfg);
      entry.tactile_features = "features/" + entry.texture_id + ".htft";
      write_tactile_features((base / entry.tactile_features).string(), entry.texture_id,
                             rows, seq_len, seq_stride, mfcc_cfg);
    }
  }
  data::save_manifest(manifest_path, manifest);
}

}  // namespace haptex::pipeline
