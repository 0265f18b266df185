#include "haptex/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace haptex::nn {

namespace {

constexpr char kMagic[4] = {'H', 'A', 'P', 'T'};

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

void save_checkpoint(const std::string& path, const CheckpointData& data) {
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["meta"] = data.meta;
  nlohmann::json table = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& [name, tensor] : data.tensors) {
    table.push_back({{"name", name},
                     {"rows", tensor.rows()},
                     {"cols", tensor.cols()},
                     {"offset", offset}});
    offset += sizeof(double) * static_cast<uint64_t>(tensor.size());
  }
  header["tensors"] = table;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  put_u16(out, kCheckpointVersion);
  put_u32(out, static_cast<uint32_t>(header_str.size()));
  out.write(header_str.data(), header_str.size());
  for (const auto& [name, tensor] : data.tensors)
    out.write(reinterpret_cast<const char*>(tensor.data()),
              sizeof(double) * tensor.size());
  if (!out) throw FormatError("short write on checkpoint: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad checkpoint magic: " + path);
  if (get_u16(in) != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version: " + path);
  const uint32_t header_len = get_u32(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), header_len);
  if (!in) throw FormatError("truncated checkpoint header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("corrupt checkpoint header in " + path + ": " + e.what());
  }

  CheckpointData data;
  data.meta = header.at("meta");
  for (const auto& entry : header.at("tensors")) {
    Matrix tensor(entry.at("rows").get<Eigen::Index>(),
                  entry.at("cols").get<Eigen::Index>());
    in.read(reinterpret_cast<char*>(tensor.data()), sizeof(double) * tensor.size());
    if (!in) throw FormatError("truncated tensor data in checkpoint: " + path);
    data.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(tensor));
  }
  return data;
}

}  // namespace haptex::nn
