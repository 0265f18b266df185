#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "haptex/errors.hpp"
#include "haptex/model.hpp"

namespace haptex::data {

// Attribute order everywhere: R-S, F-B, S-S, H-S.
inline constexpr const char* kAttributeNames[4] = {"rs", "fb", "ss", "hs"};

struct AttributeRatings {
  std::string texture_id;
  std::string class_label;
  Eigen::Vector4d values;  // -100..100
};

struct ParticipantRating {
  std::string participant_id;
  std::string texture_id;
  Eigen::Vector4d sliders;  // 0..100
};

// Per texture: mean slider per attribute mapped by r = 2m - 100.
std::vector<AttributeRatings> aggregate_ratings(const std::vector<ParticipantRating>& ratings);

std::vector<ParticipantRating> read_participant_ratings(const std::string& path);
void write_participant_ratings(const std::string& path,
                               const std::vector<ParticipantRating>& ratings);

std::vector<AttributeRatings> read_aggregated_ratings(const std::string& path);
void write_aggregated_ratings(const std::string& path,
                              const std::vector<AttributeRatings>& ratings);

// Binary relevance marks from the adjective-selection experiment.
struct AdjectiveMark {
  std::string participant_id;
  std::string texture_id;
  std::string adjective;
  int mark;  // 0 or 1
};

struct RelevanceScore {
  std::string adjective;
  double score;
};

// score(adj) = sum of marks / (participants x textures); retains adjectives
// with score >= threshold, ordered by descending score then name.
std::vector<RelevanceScore> relevance_scores(const std::vector<AdjectiveMark>& marks);
std::vector<std::string> relevance_filter(const std::vector<AdjectiveMark>& marks,
                                          double threshold);

std::vector<AdjectiveMark> read_adjective_marks(const std::string& path);

// Bubble-plot export: `texture_id,x_hs,y_fb,size_rs,color_ss,class`, ordered
// by texture id.
void hps_export(const std::string& path, std::vector<AttributeRatings> ratings);

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::string texture_id;
  std::string class_label;
  std::string raw_dir;           // optional
  std::string processed_csv;     // optional
  std::string tactile_features;  // HTFT file
  std::string image_features;    // HVFT file, rows x 2304
  std::string split_tag;         // optional
};

struct Manifest {
  std::vector<ManifestEntry> textures;
  std::string ratings_csv;  // aggregated ratings
};

// Paths are stored relative to the manifest file. Loading verifies every
// referenced file exists and throws ManifestError naming the missing path.
Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& manifest);

// Assembles model inputs: tactile sequences (length s, stride) from HTFT
// files, image-feature banks from HVFT files, targets from the ratings csv.
model::TrainingSet load_training_set(const std::string& manifest_path, int s, int stride);

// ---------------------------------------------------------------------------
// Synthetic dataset generation

struct SynthConfig {
  uint64_t seed = 1;
  int n_textures = 12;
  double duration_s = 60.0;  // raw length; cropping trims 5 s
  int images_per_texture = 8;
  int participants = 1;
  double accel_rate_hz = 3000.0;
  double force_rate_hz = 1250.0;
  double kinematics_rate_hz = 1000.0;
};

// Latent attributes u for texture `index`, uniform in [-100, 100]^4.
Eigen::Vector4d synth_latents(uint64_t seed, int index);

// Raw channels as (timestamps implicit at the given rate) N x 3 matrices.
Eigen::MatrixXd synth_accel(const Eigen::Vector4d& u, uint64_t seed, int index,
                            double rate_hz, double duration_s);
Eigen::MatrixXd synth_force(const Eigen::Vector4d& u, uint64_t seed, int index,
                            double rate_hz, double duration_s);
Eigen::MatrixXd synth_kinematics(const Eigen::Vector4d& u, uint64_t seed, int index,
                                 double rate_hz, double duration_s);

// Image-feature bank (variants x 2304): smooth basis functions of u plus
// seeded per-variant noise; the GLCM block is nonnegative and sums to 1.
Eigen::MatrixXd synth_image_features(const Eigen::Vector4d& u, uint64_t seed, int index,
                                     int variants);

// Writes raw recordings, image-feature banks, ratings files and a manifest
// under out_dir. Byte-identical for identical configs.
void synth_generate(const std::string& out_dir, const SynthConfig& cfg);

const std::vector<std::string>& synth_class_labels();  // 16 classes

}  // namespace haptex::data
