#pragma once

// Trajectory dataset container and its binary file format: a single JSON text
// line {format, m, h, count, seed, chain} followed by count*h*m little-endian
// float32 values, trajectory-major then waypoint-major.

#include "edmp/chain.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace edmp::data {

struct DatasetMeta {
  int m = 0;
  int h = 0;
  int count = 0;
  std::uint64_t seed = 0;
  std::string chain;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Trajectory> trajectories;
};

std::string dataset_header(const DatasetMeta& meta);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
DatasetMeta read_dataset_meta(const std::filesystem::path& path);

// Values as they will be stored (rounded to float32).
Trajectory round_to_float(const Trajectory& tau);

}  // namespace edmp::data
