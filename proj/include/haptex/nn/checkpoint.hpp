#pragma once

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "haptex/nn/layers.hpp"

namespace haptex::nn {

// `HAPT` checkpoint: magic, u16 version, u32 header length, canonical JSON
// header (metadata plus a named-tensor table with offsets), then raw
// little-endian float64 tensor blobs. Save/load round-trips are bit-exact.
inline constexpr uint16_t kCheckpointVersion = 1;

struct CheckpointData {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Matrix>> tensors;  // saved in this order
};

void save_checkpoint(const std::string& path, const CheckpointData& data);

CheckpointData load_checkpoint(const std::string& path);

}  // namespace haptex::nn
