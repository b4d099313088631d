#include "edmp/dataset.hpp"

#include "endian_util.hpp"
#include "json_util.hpp"

#include <fstream>
#include <stdexcept>

namespace edmp::data {

using json_util::json;

std::string dataset_header(const DatasetMeta& meta) {
  json j;
  j["format"] = "edmp-dataset-v1";
  j["m"] = meta.m;
  j["h"] = meta.h;
  j["count"] = meta.count;
  j["seed"] = meta.seed;
  j["chain"] = meta.chain;
  return j.dump() + "\n";
}

Trajectory round_to_float(const Trajectory& tau) {
  return tau.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  if (ds.meta.count != static_cast<int>(ds.trajectories.size()))
    throw std::invalid_argument("dataset: meta.count does not match trajectory count");
  std::string header = dataset_header(ds.meta);
  std::vector<char> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + static_cast<std::size_t>(ds.meta.count) * ds.meta.h * ds.meta.m * 4);
  for (const Trajectory& tau : ds.trajectories) {
    if (tau.rows() != ds.meta.h || tau.cols() != ds.meta.m)
      throw std::invalid_argument("dataset: trajectory shape does not match header");
    for (Eigen::Index k = 0; k < tau.rows(); ++k)
      for (Eigen::Index j = 0; j < tau.cols(); ++j) endian::append_f32(bytes, static_cast<float>(tau(k, j)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dataset: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("dataset: write failed for " + path.string());
}

namespace {

DatasetMeta parse_meta(const std::string& line) {
  json j = json_util::parse(line, "dataset header");
  json_util::expect_object(j, "dataset", {"format", "m", "h", "count", "seed", "chain"});
  if (json_util::field(j, "dataset", "format") != "edmp-dataset-v1")
    json_util::fail("dataset.format", "unsupported format tag");
  DatasetMeta meta;
  meta.m = json_util::field(j, "dataset", "m").get<int>();
  meta.h = json_util::field(j, "dataset", "h").get<int>();
  meta.count = json_util::field(j, "dataset", "count").get<int>();
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.chain = j.value("chain", std::string());
  if (meta.m < 1 || meta.h < 2 || meta.count < 0) json_util::fail("dataset", "bad dimensions");
  return meta;
}

DatasetMeta read_meta_line(std::ifstream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset: missing header in " + path.string());
  return parse_meta(line);
}

}  // namespace

DatasetMeta read_dataset_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot open " + path.string());
  return read_meta_line(in, path);
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot open " + path.string());
  Dataset ds;
  ds.meta = read_meta_line(in, path);
  const std::size_t per = static_cast<std::size_t>(ds.meta.h) * ds.meta.m;
  std::vector<char> payload(per * ds.meta.count * 4);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size())
    throw std::runtime_error("dataset: payload shorter than header declares in " + path.string());
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("dataset: payload longer than header declares in " + path.string());
  ds.trajectories.reserve(ds.meta.count);
  const char* p = payload.data();
  for (int n = 0; n < ds.meta.count; ++n) {
    Trajectory tau(ds.meta.h, ds.meta.m);
    for (int k = 0; k < ds.meta.h; ++k)
      for (int j = 0; j < ds.meta.m; ++j, p += 4) tau(k, j) = endian::read_f32(p);
    ds.trajectories.push_back(std::move(tau));
  }
  return ds;
}

}  // namespace edmp::data
