#pragma once

#include "edmp/dataset.hpp"
#include "edmp/denoiser.hpp"
#include "edmp/diffusion.hpp"
#include "edmp/kernels.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace edmp::train {

struct TrainConfig {
  int batch = 256;
  int steps = 1000;
  double learning_rate = 2e-4;
  std::uint64_t seed = 0;
  // Overwrite the first and last row of x_t with the clean endpoints and drop
  // them from the loss.
  bool condition = true;
  bool parallel = true;
  std::function<void(int step, double loss)> on_step;
};

struct TrainResult {
  nn::Denoiser net;
  std::vector<double> loss_history;
};

// Adam on the masked L2 noise-prediction loss. Throws std::invalid_argument on
// an empty or mis-shaped dataset and std::runtime_error naming the step if the
// loss goes non-finite.
TrainResult train(const data::Dataset& dataset, const diffusion::Schedule& sched,
                  const nn::DenoiserConfig& arch, const TrainConfig& cfg);

// Draws the training sample for (step, slot) exactly as train() does.
kernels::TrainSample make_training_sample(const data::Dataset& dataset, const diffusion::Schedule& sched,
                                        std::uint64_t seed, int step, int slot, bool condition);

}  // namespace edmp::train
