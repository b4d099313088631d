#include "edmp/checkpoint.hpp"

#include "endian_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edmp::ckpt {

namespace {

constexpr const char* kMagic = "edmp-checkpoint v1";
constexpr std::size_t kMaxHeader = 1 << 20;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string header_text(const nn::Denoiser& net, const CheckpointMeta& meta) {
  std::ostringstream os;
  os << kMagic << '\n'
     << "arch " << net.config().descriptor() << '\n'
     << "m " << meta.arch.m << '\n'
     << "h " << meta.arch.h << '\n'
     << "T " << meta.T << '\n'
     << "beta_max " << format_double(meta.beta_max) << '\n'
     << "seed " << meta.seed << '\n'
     << "steps " << meta.steps << '\n'
     << "conditioned " << (meta.conditioned ? 1 : 0) << '\n'
     << "tensors " << net.tensors().size() << '\n';
  for (const auto& t : net.tensors()) {
    os << "tensor " << t.name;
    for (int d : t.shape) os << ' ' << d;
    os << '\n';
  }
  return os.str();
}

[[noreturn]] void corrupt(const std::string& what) { throw std::runtime_error("checkpoint: " + what); }

CheckpointHeader parse_header(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kMagic) corrupt("bad magic line");
  CheckpointHeader hdr;
  int declared_tensors = -1;
  int declared_m = -1;
  int declared_h = -1;
  bool have_arch = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "arch") {
      std::string rest;
      std::getline(ls, rest);
      try {
        hdr.meta.arch = nn::DenoiserConfig::from_descriptor(rest.substr(rest.find_first_not_of(' ')));
      } catch (const std::exception& e) {
        corrupt(std::string("bad architecture descriptor: ") + e.what());
      }
      have_arch = true;
    } else if (key == "m") {
      ls >> declared_m;
    } else if (key == "h") {
      ls >> declared_h;
    } else if (key == "T") {
      ls >> hdr.meta.T;
    } else if (key == "beta_max") {
      ls >> hdr.meta.beta_max;
    } else if (key == "seed") {
      ls >> hdr.meta.seed;
    } else if (key == "steps") {
      ls >> hdr.meta.steps;
    } else if (key == "conditioned") {
      int c;
      ls >> c;
      hdr.meta.conditioned = c != 0;
    } else if (key == "tensors") {
      ls >> declared_tensors;
    } else if (key == "tensor") {
      nn::TensorInfo t;
      ls >> t.name;
      int d;
      std::size_t n = 1;
      while (ls >> d) {
        if (d <= 0) corrupt("bad shape for tensor " + t.name);
        t.shape.push_back(d);
        n *= static_cast<std::size_t>(d);
      }
      ls.clear();
      t.offset = hdr.parameter_count;
      t.size = n;
      hdr.parameter_count += n;
      hdr.tensors.push_back(std::move(t));
      continue;
    } else {
      corrupt("unknown header key '" + key + "'");
    }
    if (ls.fail()) corrupt("bad value for " + key);
  }
  if (!have_arch) corrupt("missing arch line");
  if (declared_m != hdr.meta.arch.m || declared_h != hdr.meta.arch.h) corrupt("m/h lines disagree with arch");
  if (declared_tensors != static_cast<int>(hdr.tensors.size())) corrupt("tensor count does not match table");
  return hdr;
}

CheckpointHeader read_header_bytes(std::ifstream& in) {
  std::string text;
  char c;
  while (in.get(c)) {
    if (c == '\0') break;
    text.push_back(c);
    if (text.size() > kMaxHeader) corrupt("header too long or missing terminator");
  }
  if (!in) corrupt("truncated header");
  CheckpointHeader hdr = parse_header(text);
  hdr.payload_offset = text.size() + 1;
  return hdr;
}

}  // namespace

std::string describe_difference(const nn::DenoiserConfig& expected, const nn::DenoiserConfig& found) {
  std::ostringstream os;
  auto field = [&](const char* name, const auto& a, const auto& b) {
    if (a != b) os << ' ' << name << ": expected " << a << ", found " << b << ';';
  };
  field("m", expected.m, found.m);
  field("h", expected.h, found.h);
  field("kernel", expected.kernel, found.kernel);
  field("temb", expected.temb_dim, found.temb_dim);
  for (int i = 0; i < 3; ++i) {
    std::string n = "widths[" + std::to_string(i) + "]";
    field(n.c_str(), expected.widths[i], found.widths[i]);
  }
  return os.str();
}

std::vector<char> encode_checkpoint(const nn::Denoiser& net, const CheckpointMeta& meta_in) {
  CheckpointMeta meta = meta_in;
  meta.arch = net.config();
  std::string header = header_text(net, meta);
  std::vector<char> out(header.begin(), header.end());
  out.push_back('\0');
  for (double p : net.params()) {
    float f = static_cast<float>(p);
    if (!std::isfinite(f)) throw std::runtime_error("checkpoint: refusing to save non-finite parameter");
    endian::append_f32(out, f);
  }
  return out;
}

void save_checkpoint(const nn::Denoiser& net, const CheckpointMeta& meta, const std::filesystem::path& path) {
  std::vector<char> bytes = encode_checkpoint(net, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_header_bytes(in);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<nn::DenoiserConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  CheckpointHeader hdr = read_header_bytes(in);
  if (expected && !(*expected == hdr.meta.arch))
    corrupt("architecture mismatch:" + describe_difference(*expected, hdr.meta.arch));

  nn::Denoiser net(hdr.meta.arch);
  const auto& want = net.tensors();
  if (want.size() != hdr.tensors.size())
    corrupt("tensor table has " + std::to_string(hdr.tensors.size()) + " entries, architecture needs " +
            std::to_string(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].name != hdr.tensors[i].name || want[i].shape != hdr.tensors[i].shape)
      corrupt("tensor " + std::to_string(i) + " is '" + hdr.tensors[i].name + "', architecture expects '" +
              want[i].name + "' with a different shape");
  }

  std::vector<char> payload(hdr.parameter_count * 4);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size())
    corrupt("truncated payload (" + std::to_string(in.gcount()) + " of " + std::to_string(payload.size()) +
            " bytes)");
  if (in.peek() != std::char_traits<char>::eof()) corrupt("trailing bytes after payload");

  std::vector<double> values(hdr.parameter_count);
  for (std::size_t i = 0; i < values.size(); ++i) {
    float f = endian::read_f32(payload.data() + 4 * i);
    if (!std::isfinite(f)) corrupt("non-finite parameter at index " + std::to_string(i));
    values[i] = f;
  }
  std::copy(values.begin(), values.end(), net.params().begin());
  return {std::move(net), hdr.meta};
}

}  // namespace edmp::ckpt
