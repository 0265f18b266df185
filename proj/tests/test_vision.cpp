#include <doctest.h>

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "haptex/feature_file.hpp"
#include "haptex/image.hpp"
#include "haptex/rng.hpp"
#include "haptex/vision.hpp"

using namespace haptex;
using namespace haptex::vision;

namespace {

GrayImage constant_image(int n, uint8_t v) { return GrayImage::Constant(n, n, v); }

GrayImage random_image(int rows, int cols, Rng& rng) {
  GrayImage img(rows, cols);
  for (Eigen::Index y = 0; y < rows; ++y)
    for (Eigen::Index x = 0; x < cols; ++x)
      img(y, x) = static_cast<uint8_t>(rng.uniform_int(0, 255));
  return img;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void append_u32be(std::vector<uint8_t>& v, uint32_t x) {
  for (int i = 3; i >= 0; --i) v.push_back((x >> (8 * i)) & 0xff);
}

// Minimal in-test PNG writer (filter bytes chosen by caller rows).
void write_png(const std::string& path, int w, int h,
               const std::vector<uint8_t>& filtered_rows) {
  std::vector<uint8_t> buf = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  append_u32be(buf, 13);
  const size_t ihdr_at = buf.size();
  buf.insert(buf.end(), {'I', 'H', 'D', 'R'});
  append_u32be(buf, w);
  append_u32be(buf, h);
  buf.push_back(8);   // bit depth
  buf.push_back(2);   // rgb
  buf.push_back(0);
  buf.push_back(0);
  buf.push_back(0);   // no interlace
  append_u32be(buf, crc32(0, buf.data() + ihdr_at, 17));

  uLongf comp_len = compressBound(filtered_rows.size());
  std::vector<uint8_t> comp(comp_len);
  REQUIRE(compress(comp.data(), &comp_len, filtered_rows.data(), filtered_rows.size()) ==
          Z_OK);
  append_u32be(buf, comp_len);
  const size_t idat_at = buf.size();
  buf.insert(buf.end(), {'I', 'D', 'A', 'T'});
  buf.insert(buf.end(), comp.begin(), comp.begin() + comp_len);
  append_u32be(buf, crc32(0, buf.data() + idat_at, 4 + comp_len));

  append_u32be(buf, 0);
  buf.insert(buf.end(), {'I', 'E', 'N', 'D'});
  append_u32be(buf, crc32(0, reinterpret_cast<const uint8_t*>("IEND"), 4));

  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

}  // namespace

TEST_CASE("to_grayscale: BT.601 weights") {
  RgbImage img;
  img.r = GrayImage::Constant(1, 3, 0);
  img.g = img.r;
  img.b = img.r;
  img.r(0, 0) = img.g(0, 0) = img.b(0, 0) = 255;  // white
  img.r(0, 1) = 255;                              // pure red
  img.r(0, 2) = img.g(0, 2) = img.b(0, 2) = 97;   // equal channels

  const auto g = to_grayscale(img);
  CHECK(g(0, 0) == 255);
  CHECK(g(0, 1) == 76);  // 0.299 * 255 = 76.245
  CHECK(g(0, 2) == 97);
}

TEST_CASE("quantize16: endpoints and monotonicity") {
  GrayImage img(1, 4);
  img(0, 0) = 0;
  img(0, 1) = 16;
  img(0, 2) = 255;
  img(0, 3) = 15;
  const auto q = quantize16(img);
  CHECK(q(0, 0) == 0);
  CHECK(q(0, 1) == 1);
  CHECK(q(0, 2) == 15);
  CHECK(q(0, 3) == 0);

  for (int g = 1; g < 256; ++g) {
    GrayImage a(1, 2);
    a(0, 0) = static_cast<uint8_t>(g - 1);
    a(0, 1) = static_cast<uint8_t>(g);
    const auto lv = quantize16(a);
    CHECK(lv(0, 0) <= lv(0, 1));
  }
}

TEST_CASE("glcm16: constant image concentrates at the diagonal") {
  const auto v = glcm16(quantize16(constant_image(8, 85)));  // level 5
  REQUIRE(v.size() == 256);
  CHECK(v[5 * 16 + 5] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((v.array() >= 0.0).all());
}

TEST_CASE("glcm16: alternating 1x4 strip") {
  LevelImage levels(1, 4);
  levels(0, 0) = 0;
  levels(0, 1) = 15;
  levels(0, 2) = 0;
  levels(0, 3) = 15;
  const auto v = glcm16(levels);
  CHECK(v[0 * 16 + 15] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(v[15 * 16 + 0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("glcm16: probability vector and symmetry on random images") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto img = random_image(20, 30, rng);
    const auto v = glcm16(quantize16(img));
    CHECK(std::abs(v.sum() - 1.0) <= 1e-9);
    CHECK((v.array() >= 0.0).all());
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) CHECK(v[i * 16 + j] == v[j * 16 + i]);
    // determinism from the same levels
    const auto w = glcm16(quantize16(img));
    CHECK(std::memcmp(v.data(), w.data(), sizeof(double) * 256) == 0);
  }
}

TEST_CASE("glcm16: degenerate width throws") {
  CHECK_THROWS_AS(glcm16(LevelImage::Zero(3, 1)), GlcmError);
}

TEST_CASE("patch_grid: tiling layout") {
  Rng rng(8);
  const auto img = random_image(1568, 1568, rng);
  const auto patches = patch_grid(img);
  REQUIRE(patches.size() == 49);
  CHECK(patches[0](0, 0) == img(0, 0));
  CHECK(patches[0](223, 223) == img(223, 223));
  CHECK(patches[48](0, 0) == img(1344, 1344));
  CHECK(patches[48](223, 223) == img(1567, 1567));

  CHECK(reassemble_patches(patches) == img);

  CHECK_THROWS_AS(patch_grid(constant_image(512, 9)), ShapeError);
}

TEST_CASE("feature container: round-trips are bit-exact") {
  Rng rng(101);
  Eigen::MatrixXf m(49, 2048);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<float>(rng.normal());
  const auto path = temp_file("haptex_deep.hvft");
  io::write_feature_file(path.string(), "HVFT", m);

  const auto deep = ingest_deep_features(path.string());
  REQUIRE(deep.rows() == 49);
  REQUIRE(deep.cols() == 2048);
  CHECK(deep.cast<float>() == m);

  // second write is byte-identical
  const auto path2 = temp_file("haptex_deep2.hvft");
  io::write_feature_file(path2.string(), "HVFT",
                         io::read_feature_file(path.string(), "HVFT"));
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::vector<char> ba{std::istreambuf_iterator<char>(a), {}};
  std::vector<char> bb{std::istreambuf_iterator<char>(b), {}};
  CHECK(ba == bb);
}

TEST_CASE("feature container: wrong row count is a format error") {
  Eigen::MatrixXf m = Eigen::MatrixXf::Zero(48, 2048);
  const auto path = temp_file("haptex_bad.hvft");
  io::write_feature_file(path.string(), "HVFT", m);
  CHECK_THROWS_AS(ingest_deep_features(path.string()), FormatError);

  io::write_feature_file(path.string(), "HTFT", m);
  CHECK_THROWS_AS(io::read_feature_file(path.string(), "HVFT"), FormatError);
}

TEST_CASE("fallback extractor: deterministic and offset-sensitive only via the mean") {
  FallbackDeepExtractor fx(1234);
  Rng rng(55);
  GrayImage patch(224, 224);
  for (Eigen::Index y = 0; y < 224; ++y)
    for (Eigen::Index x = 0; x < 224; ++x)
      patch(y, x) = static_cast<uint8_t>(rng.uniform_int(40, 180));

  const auto z1 = fx.extract(patch);
  const auto z2 = FallbackDeepExtractor(1234).extract(patch);
  CHECK(std::memcmp(z1.data(), z2.data(), sizeof(double) * z1.size()) == 0);

  GrayImage shifted = patch;
  shifted.array() += 40;  // stays within range
  const auto phi_a = FallbackDeepExtractor::statistics(patch);
  const auto phi_b = FallbackDeepExtractor::statistics(shifted);
  CHECK(phi_b[0] - phi_a[0] == doctest::Approx(40.0).epsilon(1e-9));
  for (int i = 1; i < 64; ++i)
    CHECK(phi_b[i] == doctest::Approx(phi_a[i]).epsilon(1e-9).scale(1.0));

  const Eigen::VectorXd dz = fx.extract(shifted) - z1;
  const Eigen::VectorXd expected = (phi_b[0] - phi_a[0]) * fx.projection().col(0);
  CHECK((dz - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fallback extractor: zero patch projects the histogram column") {
  FallbackDeepExtractor fx(77);
  const auto z = fx.extract(GrayImage::Zero(224, 224));
  // phi(0) is a single 1 in the centered-histogram bin for 0
  const Eigen::VectorXd expected = fx.projection().col(2 + 8);
  CHECK((z - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("average_patches: hand mean and invariances") {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(49, 3);
  rows(0, 0) = 49.0;
  rows(1, 1) = 98.0;
  rows(2, 2) = 24.5;
  const auto mean = average_patches(rows);
  CHECK(mean[0] == doctest::Approx(1.0));
  CHECK(mean[1] == doctest::Approx(2.0));
  CHECK(mean[2] == doctest::Approx(0.5));

  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(49, 4) * 3.25;
  CHECK((average_patches(same).array() == 3.25).all());

  Rng rng(9);
  Eigen::MatrixXd rnd(49, 8);
  for (Eigen::Index i = 0; i < rnd.size(); ++i) rnd.data()[i] = rng.normal();
  Eigen::MatrixXd perm = rnd;
  perm.row(3).swap(perm.row(40));
  perm.row(0).swap(perm.row(17));
  CHECK((average_patches(rnd) - average_patches(perm)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(average_patches(Eigen::MatrixXd::Zero(48, 8)), ShapeError);
}

TEST_CASE("image_feature_vector: dimensions and determinism") {
  Rng rng(21);
  const auto img = random_image(1568, 1568, rng);
  FallbackDeepExtractor fx(3);
  const auto a = image_feature_vector(img, fx, "t1");
  REQUIRE(a.values.size() == 2304);
  const auto b = image_feature_vector(img, fx, "t1");
  CHECK(std::memcmp(a.values.data(), b.values.data(), sizeof(double) * 2304) == 0);
}

TEST_CASE("image_feature_vector: constant image has a one-hot GLCM block") {
  FallbackDeepExtractor fx(3);
  const auto v = image_feature_vector(constant_image(1568, 200), fx, "t");
  const auto glcm = v.values.tail(256);
  CHECK(glcm[(200 / 16) * 16 + (200 / 16)] == doctest::Approx(1.0));
  CHECK(glcm.sum() == doctest::Approx(1.0));
  CHECK((glcm.array() >= 0.0).all());
}

TEST_CASE("image_feature_vector: constant images are rotation-invariant end to end") {
  FallbackDeepExtractor fx(3);
  const auto img = constant_image(1568, 133);
  GrayImage rotated = img;
  Rng noise_rng(0);
  rotated = apply_augment(img, AugmentPlan{1, false, false}, 0.0, noise_rng);
  const auto a = image_feature_vector(img, fx, "t");
  const auto b = image_feature_vector(rotated, fx, "t");
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("augment: identity plan with noise off returns the input") {
  Rng rng(1);
  const auto img = random_image(64, 64, rng);
  Rng unused(0);
  const auto out = apply_augment(img, AugmentPlan{0, false, false}, 0.0, unused);
  CHECK(out == img);
}

TEST_CASE("augment: half turn reverses both axes") {
  GrayImage img(2, 2);
  img(0, 0) = 1;
  img(0, 1) = 2;
  img(1, 0) = 3;
  img(1, 1) = 4;
  Rng unused(0);
  const auto out = apply_augment(img, AugmentPlan{2, false, false}, 0.0, unused);
  CHECK(out(0, 0) == 4);
  CHECK(out(0, 1) == 3);
  CHECK(out(1, 0) == 2);
  CHECK(out(1, 1) == 1);
}

TEST_CASE("augment: seeded pipeline is deterministic") {
  Rng rng(2);
  const auto img = random_image(48, 48, rng);
  const auto a = augment(img, 12345);
  const auto b = augment(img, 12345);
  CHECK(a == b);
  // different seeds eventually differ
  bool any_diff = false;
  for (uint64_t s = 0; s < 8 && !any_diff; ++s) any_diff = (augment(img, s) != a);
  CHECK(any_diff);
}

TEST_CASE("image io: PGM round trip and PNG decode") {
  Rng rng(77);
  const auto img = random_image(33, 47, rng);
  const auto pgm = temp_file("haptex_io_test.pgm");
  save_pgm(pgm.string(), img);
  CHECK(load_gray(pgm.string()) == img);

  // 3x2 RGB PNG: row 0 unfiltered, row 1 Up-filtered
  const std::vector<uint8_t> row0 = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  const std::vector<uint8_t> row1 = {15, 25, 35, 45, 55, 65, 75, 85, 95};
  std::vector<uint8_t> filtered;
  filtered.push_back(0);
  filtered.insert(filtered.end(), row0.begin(), row0.end());
  filtered.push_back(2);
  for (size_t i = 0; i < row1.size(); ++i)
    filtered.push_back(static_cast<uint8_t>(row1[i] - row0[i]));
  const auto png = temp_file("haptex_io_test.png");
  write_png(png.string(), 3, 2, filtered);

  const auto rgb = load_rgb(png.string());
  REQUIRE(rgb.rows() == 2);
  REQUIRE(rgb.cols() == 3);
  CHECK(rgb.r(0, 0) == 10);
  CHECK(rgb.g(0, 1) == 50);
  CHECK(rgb.b(1, 2) == 95);
  CHECK(rgb.r(1, 0) == 15);
}
