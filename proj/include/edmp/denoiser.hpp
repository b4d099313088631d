#pragma once

// Noise-prediction network eps_theta(x_t, t): a 1-D temporal U-Net over the
// horizon axis.
//
//   enc1 = Res(m -> w1)           length h
//   enc2 = Res(w1 -> w2)          after stride-2 conv, length ceil(h/2)
//   mid  = Res(w2 -> w3)          after stride-2 conv
//   dec2 = Res(w3 + w2 -> w2)     nearest upsample, concat enc2
//   dec1 = Res(w2 + w1 -> w1)     nearest upsample, concat enc1
//   head = Conv(w1 -> m)          zero-initialised
//
// Each residual block receives a projection of the sinusoidal timestep
// embedding, so time is injected at every resolution. Gradients are
// hand-derived; see loss_and_gradient.

#include "edmp/chain.hpp"
#include "edmp/nn_ops.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edmp::nn {

// Packet-aligned so Eigen maps over parameters take the same code path for
// every network instance.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

struct DenoiserConfig {
  int m = 3;
  int h = 50;
  std::array<int, 3> widths{32, 64, 128};
  int kernel = 5;
  int temb_dim = 32;

  std::string descriptor() const;
  static DenoiserConfig from_descriptor(const std::string& text);
  bool operator==(const DenoiserConfig&) const = default;
};

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

class Denoiser {
 public:
  explicit Denoiser(const DenoiserConfig& cfg);

  const DenoiserConfig& config() const { return cfg_; }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Uniform(+-1/sqrt(fan_in)) weights, zero output head, values rounded to
  // float precision so checkpoints round-trip exactly.
  void initialize(std::uint64_t seed);
  void zero_head();
  void round_to_float();

  // Throws std::runtime_error naming the layer if an activation goes
  // non-finite.
  Trajectory predict(const Trajectory& x_t, int t) const;

  // Mean squared error between predicted and true noise over the included
  // rows (all rows, or rows 1..h-2 when `exclude_endpoints`). Adds dL/dparams
  // into `grad` (same layout as params()).
  double loss_and_gradient(const Trajectory& x_t, int t, const Trajectory& eps, bool exclude_endpoints,
                           std::span<double> grad) const;
  double loss(const Trajectory& x_t, int t, const Trajectory& eps, bool exclude_endpoints) const;

 private:
  struct Conv {
    ConvShape shape;
    std::size_t w = 0;
    std::size_t b = 0;
  };
  struct Linear {
    int in = 0;
    int out = 0;
    std::size_t w = 0;
    std::size_t b = 0;
  };
  struct ResBlock {
    std::string name;
    Conv conv1, conv2;
    Linear temb;
    bool has_skip = false;
    Conv skip;
  };
  struct ResCache;
  struct Forward;

  std::size_t add_tensor(const std::string& name, std::vector<int> shape);
  Conv make_conv(const std::string& name, ConvShape shape);
  Linear make_linear(const std::string& name, int in, int out);
  ResBlock make_block(const std::string& name, int cin, int cout);

  std::span<const double> span(std::size_t off, std::size_t n) const { return {params_.data() + off, n}; }

  Mat apply_conv(const Conv& c, const Mat& x, Mat* cols) const;
  Vec apply_linear(const Linear& l, const Vec& x) const;
  Mat block_forward(const ResBlock& blk, const Mat& x, const Vec& emb, ResCache& cache) const;
  Mat block_backward(const ResBlock& blk, const ResCache& cache, const Mat& dout, const Vec& emb, Vec& demb,
                     std::span<double> grad) const;
  Mat conv_backward(const Conv& c, const Mat& cols, const Mat& dy, int length, std::span<double> grad) const;

  void run_forward(const Trajectory& x_t, int t, Forward& f) const;

  DenoiserConfig cfg_;
  std::vector<TensorInfo> tensors_;
  AlignedBuffer params_;

  Linear temb_mlp_;
  ResBlock enc1_, enc2_, mid_, dec2_, dec1_;
  Conv down1_, down2_, head_;
};

}  // namespace edmp::nn
