#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "haptex/image.hpp"

namespace haptex::vision {

namespace {

std::vector<uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

uint32_t be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

RgbImage from_interleaved(const std::vector<uint8_t>& px, int w, int h, int ch) {
  RgbImage img;
  img.r.resize(h, w);
  img.g.resize(h, w);
  img.b.resize(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const uint8_t* p = px.data() + (static_cast<size_t>(y) * w + x) * ch;
      if (ch == 1 || ch == 2) {
        img.r(y, x) = img.g(y, x) = img.b(y, x) = p[0];
      } else {
        img.r(y, x) = p[0];
        img.g(y, x) = p[1];
        img.b(y, x) = p[2];
      }
    }
  }
  return img;
}

RgbImage load_png(const std::vector<uint8_t>& buf, const std::string& path) {
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
    throw FormatError("not a PNG file: " + path);

  size_t pos = 8;
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<uint8_t> idat;
  bool saw_ihdr = false;

  while (pos + 8 <= buf.size()) {
    const uint32_t len = be32(&buf[pos]);
    if (pos + 12 + len > buf.size()) throw FormatError("truncated PNG: " + path);
    const char* type = reinterpret_cast<const char*>(&buf[pos + 4]);
    const uint8_t* data = &buf[pos + 8];

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw FormatError("bad IHDR: " + path);
      width = be32(data);
      height = be32(data + 4);
      bit_depth = data[8];
      color_type = data[9];
      if (data[12] != 0) throw FormatError("interlaced PNG unsupported: " + path);
      if (bit_depth != 8) throw FormatError("only 8-bit PNG supported: " + path);
      if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6)
        throw FormatError("unsupported PNG color type: " + path);
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || width <= 0 || height <= 0)
    throw FormatError("missing PNG header: " + path);

  const int ch = (color_type == 0) ? 1 : (color_type == 2) ? 3 : (color_type == 4) ? 2 : 4;
  const size_t stride = static_cast<size_t>(width) * ch;
  std::vector<uint8_t> raw(static_cast<size_t>(height) * (stride + 1));
  uLongf raw_len = raw.size();
  if (uncompress(raw.data(), &raw_len, idat.data(), idat.size()) != Z_OK ||
      raw_len != raw.size())
    throw FormatError("PNG inflate failed: " + path);

  std::vector<uint8_t> px(static_cast<size_t>(height) * stride);
  for (int y = 0; y < height; ++y) {
    const uint8_t filter = raw[static_cast<size_t>(y) * (stride + 1)];
    const uint8_t* src = &raw[static_cast<size_t>(y) * (stride + 1) + 1];
    uint8_t* dst = &px[static_cast<size_t>(y) * stride];
    const uint8_t* up = y > 0 ? &px[static_cast<size_t>(y - 1) * stride] : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<size_t>(ch) ? dst[i - ch] : 0;
      const int b = up ? up[i] : 0;
      const int c = (up && i >= static_cast<size_t>(ch)) ? up[i - ch] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw FormatError("bad PNG filter byte: " + path);
      }
      dst[i] = static_cast<uint8_t>(v & 0xff);
    }
  }
  return from_interleaved(px, width, height, ch);
}

void skip_pnm_space(const std::vector<uint8_t>& buf, size_t& pos) {
  while (pos < buf.size()) {
    if (std::isspace(buf[pos])) {
      ++pos;
    } else if (buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

long pnm_int(const std::vector<uint8_t>& buf, size_t& pos, const std::string& path) {
  skip_pnm_space(buf, pos);
  long v = 0;
  bool any = false;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    v = v * 10 + (buf[pos] - '0');
    ++pos;
    any = true;
  }
  if (!any) throw FormatError("malformed PNM header: " + path);
  return v;
}

RgbImage load_pnm(const std::vector<uint8_t>& buf, const std::string& path) {
  if (buf.size() < 2) throw FormatError("truncated PNM: " + path);
  const char kind = static_cast<char>(buf[1]);
  if (buf[0] != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6'))
    throw FormatError("unsupported PNM variant: " + path);
  const bool color = (kind == '3' || kind == '6');
  const bool ascii = (kind == '2' || kind == '3');
  const int ch = color ? 3 : 1;

  size_t pos = 2;
  const long w = pnm_int(buf, pos, path);
  const long h = pnm_int(buf, pos, path);
  const long maxv = pnm_int(buf, pos, path);
  if (w <= 0 || h <= 0 || maxv != 255)
    throw FormatError("PNM must be 8-bit with positive size: " + path);

  std::vector<uint8_t> px(static_cast<size_t>(w) * h * ch);
  if (ascii) {
    for (auto& v : px) v = static_cast<uint8_t>(pnm_int(buf, pos, path));
  } else {
    ++pos;  // single whitespace after maxval
    if (pos + px.size() > buf.size()) throw FormatError("truncated PNM data: " + path);
    std::memcpy(px.data(), buf.data() + pos, px.size());
  }
  return from_interleaved(px, static_cast<int>(w), static_cast<int>(h), ch);
}

}  // namespace

RgbImage load_rgb(const std::string& path) {
  const auto buf = slurp(path);
  if (buf.size() >= 8 && buf[0] == 0x89 && buf[1] == 'P') return load_png(buf, path);
  if (buf.size() >= 2 && buf[0] == 'P') return load_pnm(buf, path);
  throw FormatError("unrecognized image format: " + path);
}

GrayImage load_gray(const std::string& path) { return to_grayscale(load_rgb(path)); }

void save_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write image: " + path);
  out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    for (Eigen::Index x = 0; x < img.cols(); ++x)
      out.put(static_cast<char>(img(y, x)));
}

GrayImage to_grayscale(const RgbImage& rgb) {
  if (rgb.g.rows() != rgb.r.rows() || rgb.b.rows() != rgb.r.rows() ||
      rgb.g.cols() != rgb.r.cols() || rgb.b.cols() != rgb.r.cols())
    throw ShapeError("to_grayscale: channel planes differ in shape");
  GrayImage out(rgb.rows(), rgb.cols());
  for (Eigen::Index y = 0; y < out.rows(); ++y) {
    for (Eigen::Index x = 0; x < out.cols(); ++x) {
      const double v = 0.299 * rgb.r(y, x) + 0.587 * rgb.g(y, x) + 0.114 * rgb.b(y, x);
      out(y, x) = static_cast<uint8_t>(std::min(255.0, std::floor(v + 0.5)));
    }
  }
  return out;
}

}  // namespace haptex::vision
