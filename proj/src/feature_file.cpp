#include "haptex/feature_file.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace haptex::io {

namespace {

void put_u16(std::ostream& out, uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

uint16_t get_u16(std::istream& in) {
  uint8_t b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint32_t get_u32(std::istream& in) {
  uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

}  // namespace

void write_feature_file(const std::string& path, const char magic[4],
                        const Eigen::MatrixXf& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write feature file: " + path);
  out.write(magic, 4);
  put_u16(out, kFeatureFileVersion);
  put_u32(out, static_cast<uint32_t>(rows.rows()));
  put_u32(out, static_cast<uint32_t>(rows.cols()));
  // row-major on disk
  std::vector<float> buf(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) buf[c] = rows(r, c);
    out.write(reinterpret_cast<const char*>(buf.data()), sizeof(float) * buf.size());
  }
  if (!out) throw FormatError("short write on feature file: " + path);
}

Eigen::MatrixXf read_feature_file(const std::string& path, const char magic[4]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open feature file: " + path);
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0)
    throw FormatError("bad magic in feature file: " + path);
  const uint16_t version = get_u16(in);
  if (version != kFeatureFileVersion)
    throw FormatError("unsupported feature file version in " + path);
  const uint32_t n_rows = get_u32(in);
  const uint32_t n_cols = get_u32(in);
  if (!in) throw FormatError("truncated feature file header: " + path);

  Eigen::MatrixXf m(n_rows, n_cols);
  std::vector<float> buf(n_cols);
  for (uint32_t r = 0; r < n_rows; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), sizeof(float) * n_cols);
    if (!in) throw FormatError("truncated feature file data: " + path);
    for (uint32_t c = 0; c < n_cols; ++c) m(r, c) = buf[c];
  }
  return m;
}

Eigen::MatrixXf read_feature_file(const std::string& path, const char magic[4],
                                  Eigen::Index expect_rows, Eigen::Index expect_cols) {
  Eigen::MatrixXf m = read_feature_file(path, magic);
  if (m.rows() != expect_rows || m.cols() != expect_cols)
    throw FormatError(path + ": expected " + std::to_string(expect_rows) + "x" +
                      std::to_string(expect_cols) + " features, found " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  return m;
}

}  // namespace haptex::io
