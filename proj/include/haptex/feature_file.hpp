#pragma once

#include <Eigen/Dense>

#include <string>

#include "haptex/errors.hpp"

namespace haptex::io {

// Binary feature container shared by the tactile (`HTFT`) and vision (`HVFT`)
// pipelines: magic, u16 version, u32 rows, u32 cols, then row-major 32-bit
// little-endian floats. A JSON sidecar (written by callers) carries metadata.
inline constexpr uint16_t kFeatureFileVersion = 1;

void write_feature_file(const std::string& path, const char magic[4],
                        const Eigen::MatrixXf& rows);

// Throws FormatError on magic/shape mismatch or truncation.
Eigen::MatrixXf read_feature_file(const std::string& path, const char magic[4]);

Eigen::MatrixXf read_feature_file(const std::string& path, const char magic[4],
                                  Eigen::Index expect_rows, Eigen::Index expect_cols);

}  // namespace haptex::io
