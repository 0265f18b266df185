#pragma once

#include <string>

#include "haptex/signal.hpp"
#include "haptex/tactile.hpp"

namespace haptex::pipeline {

struct PipelineConfig {
  double target_hz = 1000.0;
  double crop_s = 2.5;
  double accel_band_lo_hz = 20.0;
  double accel_band_hi_hz = 500.0;
  double interaction_lowpass_hz = 25.0;
  int segment_window = 500;
  int segment_hop = 250;
};

// Raw recording directory: accel.csv, force.csv, kinematics.csv (headers
// `t_s,..` with strictly increasing timestamps) plus meta.json.
signal::Recording read_recording(const std::string& dir);

struct ProcessedRecording {
  std::string texture_id;
  std::string class_label;
  signal::TimeSeries a;  // single-axis acceleration
  signal::TimeSeries v;  // scanning speed magnitude
  signal::TimeSeries f;  // normal force
};

// resample -> align -> crop -> filter -> combine
ProcessedRecording preprocess(const signal::Recording& rec, const PipelineConfig& cfg = {});

// `t_s,a,v,f` at the pipeline rate, 6 significant digits
void write_processed_csv(const std::string& path, const ProcessedRecording& rec);
ProcessedRecording read_processed_csv(const std::string& path);

// Windows the processed channels and emits one 526-entry feature row per
// segment (`HTFT` container plus JSON sidecar).
Eigen::MatrixXf extract_tactile_features(const ProcessedRecording& rec,
                                         const PipelineConfig& cfg,
                                         const tactile::MfccConfig& mfcc_cfg = {});

void write_tactile_features(const std::string& path, const std::string& texture_id,
                            const Eigen::MatrixXf& rows, int seq_len, int seq_stride,
                            const tactile::MfccConfig& mfcc_cfg = {});

// Fills in processed signals and tactile features for every manifest entry
// that still lacks them (processed/<id>.csv, features/<id>.htft beside the
// manifest) and rewrites the manifest.
void prepare_dataset(const std::string& manifest_path, const PipelineConfig& cfg = {},
                     int seq_len = 8, int seq_stride = 4,
                     const tactile::MfccConfig& mfcc_cfg = {});

}  // namespace haptex::pipeline
