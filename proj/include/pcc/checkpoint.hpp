#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "pcc/config.hpp"
#include "pcc/model.hpp"

namespace pcc {

// Binary layout, all integers and floats little-endian:
//   "PCCK" | u32 format version | u8 model kind
//   | u32 tensor count | per tensor: u32 rank, rank × u32 dims
//   | f64 parameter values, tensors in order
//   | u32 config length | RunConfig text (output paths cleared)
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  RunConfig config;
  Model model;
};

std::string encode_checkpoint(const Model& model, const RunConfig& config);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const RunConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pcc
