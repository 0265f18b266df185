#include "haptex/vision.hpp"

#include <cmath>

#include "haptex/feature_file.hpp"

namespace haptex::vision {

LevelImage quantize16(const GrayImage& img) {
  return (img.array() / 16).matrix();
}

Eigen::VectorXd glcm16(const LevelImage& levels) {
  if (levels.rows() < 1 || levels.cols() < 2)
    throw GlcmError("glcm16: image must be at least 1x2");
  if ((levels.array() > 15).any()) throw GlcmError("glcm16: levels must be in 0..15");

  Eigen::Matrix<double, 16, 16> counts = Eigen::Matrix<double, 16, 16>::Zero();
  for (Eigen::Index r = 0; r < levels.rows(); ++r) {
    for (Eigen::Index c = 0; c + 1 < levels.cols(); ++c) {
      const int a = levels(r, c), b = levels(r, c + 1);
      counts(a, b) += 1.0;
      counts(b, a) += 1.0;
    }
  }
  counts /= counts.sum();

  Eigen::VectorXd out(256);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) out[i * 16 + j] = counts(i, j);
  return out;
}

std::vector<GrayImage> patch_grid(const GrayImage& img) {
  if (img.rows() != kCanonicalImageSize || img.cols() != kCanonicalImageSize)
    throw ShapeError("patch_grid: expected a 1568x1568 image, got " +
                     std::to_string(img.rows()) + "x" + std::to_string(img.cols()));
  std::vector<GrayImage> patches;
  patches.reserve(kPatchCount);
  for (int i = 0; i < kPatchGrid; ++i)
    for (int j = 0; j < kPatchGrid; ++j)
      patches.push_back(img.block(i * kPatchSize, j * kPatchSize, kPatchSize, kPatchSize));
  return patches;
}

GrayImage reassemble_patches(const std::vector<GrayImage>& patches) {
  if (patches.size() != kPatchCount)
    throw ShapeError("reassemble_patches: expected 49 patches");
  GrayImage img(kCanonicalImageSize, kCanonicalImageSize);
  for (int i = 0; i < kPatchGrid; ++i)
    for (int j = 0; j < kPatchGrid; ++j)
      img.block(i * kPatchSize, j * kPatchSize, kPatchSize, kPatchSize) =
          patches[i * kPatchGrid + j];
  return img;
}

Eigen::MatrixXd ingest_deep_features(const std::string& path) {
  return io::read_feature_file(path, "HVFT", kPatchCount, kDeepDim).cast<double>();
}

FallbackDeepExtractor::FallbackDeepExtractor(uint64_t seed) {
  Rng rng(derive_seed(seed, "fallback-projection"));
  projection_.resize(kDeepDim, 64);
  const double scale = 1.0 / std::sqrt(64.0);
  for (Eigen::Index r = 0; r < projection_.rows(); ++r)
    for (Eigen::Index c = 0; c < projection_.cols(); ++c)
      projection_(r, c) = scale * rng.normal();
}

Eigen::VectorXd FallbackDeepExtractor::statistics(const GrayImage& patch) {
  if (patch.rows() != kPatchSize || patch.cols() != kPatchSize)
    throw ShapeError("fallback extractor: expected a 224x224 patch");

  const Eigen::Index h = patch.rows(), w = patch.cols();
  const double n = static_cast<double>(h * w);

  Eigen::MatrixXd p = patch.cast<double>();
  const double mean = p.sum() / n;
  Eigen::MatrixXd centered = p.array() - mean;
  const double variance = centered.squaredNorm() / n;

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(64);
  phi[0] = mean;
  phi[1] = variance;

  // histogram of centered intensities over [-128, 128), offset-invariant
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      int bin = static_cast<int>(std::floor((centered(y, x) + 128.0) / 16.0));
      bin = std::clamp(bin, 0, 15);
      phi[2 + bin] += 1.0 / n;
    }
  }

  double row_grad = 0.0, col_grad = 0.0;
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x + 1 < w; ++x)
      row_grad += std::pow(p(y, x + 1) - p(y, x), 2);
  for (Eigen::Index y = 0; y + 1 < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x)
      col_grad += std::pow(p(y + 1, x) - p(y, x), 2);
  phi[18] = row_grad / (static_cast<double>(h) * (w - 1));
  phi[19] = col_grad / (static_cast<double>(h - 1) * w);

  for (int lag = 1; lag <= 30; ++lag) {
    double acc = 0.0;
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x + lag < w; ++x) acc += centered(y, x) * centered(y, x + lag);
    phi[19 + lag] = acc / (static_cast<double>(h) * (w - lag));
  }
  for (int lag = 1; lag <= 14; ++lag) {
    double acc = 0.0;
    for (Eigen::Index y = 0; y + lag < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) acc += centered(y, x) * centered(y + lag, x);
    phi[49 + lag] = acc / (static_cast<double>(h - lag) * w);
  }
  return phi;
}

Eigen::VectorXd FallbackDeepExtractor::extract(const GrayImage& patch) const {
  return projection_ * statistics(patch);
}

Eigen::MatrixXd FallbackDeepExtractor::extract_all(const std::vector<GrayImage>& patches) const {
  Eigen::MatrixXd out(patches.size(), kDeepDim);
  for (size_t i = 0; i < patches.size(); ++i) out.row(i) = extract(patches[i]).transpose();
  return out;
}

Eigen::VectorXd average_patches(const Eigen::MatrixXd& vectors) {
  if (vectors.rows() != kPatchCount)
    throw ShapeError("average_patches: expected 49 patch rows, got " +
                     std::to_string(vectors.rows()));
  return vectors.colwise().mean();
}

namespace {

ImageFeatureVector assemble(const GrayImage& img, const Eigen::MatrixXd& patch_deep,
                            std::string texture_id) {
  ImageFeatureVector out;
  out.texture_id = std::move(texture_id);
  out.values.resize(kImageFeatureDim);
  out.values.head(kDeepDim) = average_patches(patch_deep);
  out.values.tail(kGlcmDim) = glcm16(quantize16(img));
  return out;
}

}  // namespace

ImageFeatureVector image_feature_vector(const GrayImage& img,
                                        const Eigen::MatrixXd& patch_deep,
                                        const std::string& texture_id) {
  if (patch_deep.cols() != kDeepDim)
    throw ShapeError("image_feature_vector: deep features must have 2048 columns");
  return assemble(img, patch_deep, texture_id);
}

ImageFeatureVector image_feature_vector(const GrayImage& img,
                                        const FallbackDeepExtractor& extractor,
                                        const std::string& texture_id) {
  return assemble(img, extractor.extract_all(patch_grid(img)), texture_id);
}

namespace {

GrayImage rot90_ccw(const GrayImage& img) {
  GrayImage out(img.cols(), img.rows());
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    for (Eigen::Index x = 0; x < img.cols(); ++x)
      out(img.cols() - 1 - x, y) = img(y, x);
  return out;
}

}  // namespace

AugmentPlan sample_augment_plan(Rng& rng) {
  AugmentPlan plan;
  plan.quarter_turns = rng.uniform_int(0, 3);
  plan.hflip = rng.bernoulli(0.5);
  plan.vflip = rng.bernoulli(0.5);
  return plan;
}

GrayImage apply_augment(const GrayImage& img, const AugmentPlan& plan,
                        double noise_sigma, Rng& rng) {
  GrayImage out = img;
  for (int i = 0; i < plan.quarter_turns % 4; ++i) out = rot90_ccw(out);
  if (plan.hflip) out = out.rowwise().reverse().eval();
  if (plan.vflip) out = out.colwise().reverse().eval();
  if (noise_sigma > 0.0) {
    for (Eigen::Index x = 0; x < out.cols(); ++x) {
      for (Eigen::Index y = 0; y < out.rows(); ++y) {
        const double v = out(y, x) + noise_sigma * rng.normal();
        out(y, x) = static_cast<uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

GrayImage augment(const GrayImage& img, uint64_t seed, double noise_sigma) {
  Rng rng(seed);
  const AugmentPlan plan = sample_augment_plan(rng);
  return apply_augment(img, plan, noise_sigma, rng);
}

}  // namespace haptex::vision
