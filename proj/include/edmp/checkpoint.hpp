#pragma once

// Checkpoint file: a text header terminated by one zero byte, then every
// tensor as little-endian float32 in header-table order.
//
//   edmp-checkpoint v1
//   arch <descriptor>
//   m <m>  h <h>  T <T>  beta_max <b>  seed <s>  steps <n>  conditioned <0|1>
//   tensors <count>
//   tensor <name> <dim>...
//   \0<payload>

#include "edmp/denoiser.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edmp::ckpt {

struct CheckpointMeta {
  nn::DenoiserConfig arch;
  int T = 64;
  double beta_max = 0.02;
  std::uint64_t seed = 0;
  int steps = 0;
  bool conditioned = true;
};

struct CheckpointHeader {
  CheckpointMeta meta;
  std::vector<nn::TensorInfo> tensors;
  std::size_t parameter_count = 0;
  std::size_t payload_offset = 0;
};

struct Checkpoint {
  nn::Denoiser net;
  CheckpointMeta meta;
};

std::vector<char> encode_checkpoint(const nn::Denoiser& net, const CheckpointMeta& meta);
void save_checkpoint(const nn::Denoiser& net, const CheckpointMeta& meta, const std::filesystem::path& path);

// Reads only the header; the payload is not touched.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Throws std::runtime_error on truncation, a corrupt header, or a tensor table
// that disagrees with the declared architecture. When `expected` is given, an
// architecture mismatch is reported as a field-by-field diff.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<nn::DenoiserConfig>& expected = std::nullopt);

std::string describe_difference(const nn::DenoiserConfig& expected, const nn::DenoiserConfig& found);

}  // namespace edmp::ckpt
