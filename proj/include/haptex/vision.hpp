#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "haptex/image.hpp"
#include "haptex/rng.hpp"

namespace haptex::vision {

inline constexpr int kPatchSize = 224;
inline constexpr int kPatchGrid = 7;
inline constexpr int kPatchCount = kPatchGrid * kPatchGrid;
inline constexpr int kDeepDim = 2048;
inline constexpr int kGlcmDim = 256;
inline constexpr int kImageFeatureDim = kDeepDim + kGlcmDim;
inline constexpr int kCanonicalImageSize = kPatchGrid * kPatchSize;  // 1568

// Gray levels 0..15 via floor(g / 16).
using LevelImage = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
LevelImage quantize16(const GrayImage& img);

// Horizontal distance-1 co-occurrence counts, accumulated symmetrically and
// normalized to sum 1; flattened row-major into 256 entries.
Eigen::VectorXd glcm16(const LevelImage& levels);

// 7x7 grid of 224x224 patches at stride 224 (exact tiling), row-major order.
std::vector<GrayImage> patch_grid(const GrayImage& img);

GrayImage reassemble_patches(const std::vector<GrayImage>& patches);

// Per-patch 2048-d vectors from an `HVFT` container (49 x 2048).
Eigen::MatrixXd ingest_deep_features(const std::string& path);

// Deterministic stand-in for the external deep-feature extractor: a fixed
// seeded random projection of 64 patch statistics.
class FallbackDeepExtractor {
 public:
  explicit FallbackDeepExtractor(uint64_t seed);

  // mean, variance, 16-bin centered histogram, row/col gradient energies,
  // 30 row-lag + 14 col-lag autocorrelation taps
  static Eigen::VectorXd statistics(const GrayImage& patch);

  Eigen::VectorXd extract(const GrayImage& patch) const;

  // 49 x 2048, rows in patch order
  Eigen::MatrixXd extract_all(const std::vector<GrayImage>& patches) const;

  const Eigen::MatrixXd& projection() const { return projection_; }

 private:
  Eigen::MatrixXd projection_;  // 2048 x 64
};

Eigen::VectorXd average_patches(const Eigen::MatrixXd& vectors);

struct ImageFeatureVector {
  std::string texture_id;
  Eigen::VectorXd values;  // deep(2048) then glcm(256)
};

ImageFeatureVector image_feature_vector(const GrayImage& img,
                                        const Eigen::MatrixXd& patch_deep,
                                        const std::string& texture_id = "");

ImageFeatureVector image_feature_vector(const GrayImage& img,
                                        const FallbackDeepExtractor& extractor,
                                        const std::string& texture_id = "");

// Seeded augmentation: quarter-turn rotation, independent horizontal and
// vertical flips (p = 0.5 each), then optional Gaussian intensity noise.
struct AugmentPlan {
  int quarter_turns = 0;  // counterclockwise
  bool hflip = false;
  bool vflip = false;
};

AugmentPlan sample_augment_plan(Rng& rng);

GrayImage apply_augment(const GrayImage& img, const AugmentPlan& plan,
                        double noise_sigma, Rng& rng);

GrayImage augment(const GrayImage& img, uint64_t seed, double noise_sigma = 5.0);

}  // namespace haptex::vision
