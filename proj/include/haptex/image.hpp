#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "haptex/errors.hpp"

namespace haptex::vision {

// 8-bit images. Matrices are indexed (row, col).
using GrayImage = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct RgbImage {
  GrayImage r, g, b;

  Eigen::Index rows() const { return r.rows(); }
  Eigen::Index cols() const { return r.cols(); }
};

// Loaders for 8-bit PNG (gray / RGB / with alpha, non-interlaced), PGM (P2/P5)
// and PPM (P3/P6). PGM loads replicate the gray plane.
RgbImage load_rgb(const std::string& path);
GrayImage load_gray(const std::string& path);

void save_pgm(const std::string& path, const GrayImage& img);

// BT.601 luma, rounded half-up.
GrayImage to_grayscale(const RgbImage& rgb);

}  // namespace haptex::vision
