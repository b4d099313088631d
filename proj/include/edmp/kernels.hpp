#pragma once

// Batch kernels. Each has a serial and an OpenMP path that produce
// bit-identical results: work is split into per-item (or fixed-size chunk)
// units whose arithmetic does not depend on the thread count, and reductions
// run in a fixed order afterwards.

#include "edmp/chain.hpp"

#include <functional>
#include <span>
#include <vector>

namespace edmp::nn {
class Denoiser;
}

namespace edmp::kernels {

enum class Exec { serial, parallel };

// Runs fn(i) for i in [0, n). Exceptions are collected and the one thrown by
// the lowest index is rethrown after the loop.
void for_each_index(int n, Exec exec, const std::function<void(int)>& fn);

void predict_batch(const nn::Denoiser& net, std::span<const Trajectory> x, std::span<const int> t,
                   std::span<Trajectory> out, Exec exec);

struct TrainSample {
  Trajectory x_t;
  int t = 1;
  Trajectory eps;
};

inline constexpr int kGradientChunk = 8;

struct BatchGradient {
  double loss = 0.0;                // mean over samples
  std::vector<double> gradient;     // mean over samples
};

BatchGradient loss_gradient_batch(const nn::Denoiser& net, std::span<const TrainSample> batch,
                                  bool exclude_endpoints, Exec exec);

// Number of OpenMP threads the parallel path will use.
int thread_count();
void set_thread_count(int n);

}  // namespace edmp::kernels
