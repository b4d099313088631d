#include "edmp/train.hpp"

#include "edmp/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace edmp::train {

namespace {

class Adam {
 public:
  Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      double update = lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEps);
      // Parameters are kept representable as float32 so checkpoints are exact.
      params[i] = static_cast<double>(static_cast<float>(params[i] - update));
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace

kernels::TrainSample make_training_sample(const data::Dataset& dataset, const diffusion::Schedule& sched,
                                          std::uint64_t seed, int step, int slot, bool condition) {
  const auto s = static_cast<std::uint64_t>(step);
  const auto i = static_cast<std::uint64_t>(slot);
  const int count = static_cast<int>(dataset.trajectories.size());
  const Trajectory& x0 = dataset.trajectories[rng::Stream(seed, rng::Purpose::train_index, s, i).uniform_int(0, count - 1)];
  kernels::TrainSample sample;
  sample.t = rng::Stream(seed, rng::Purpose::train_time, s, i).uniform_int(1, sched.T);
  sample.eps.resize(x0.rows(), x0.cols());
  rng::Stream(seed, rng::Purpose::train_noise, s, i).fill_normal(sample.eps);
  sample.x_t = diffusion::forward_diffuse(x0, sample.t, sample.eps, sched);
  if (condition) {
    sample.x_t.row(0) = x0.row(0);
    sample.x_t.row(x0.rows() - 1) = x0.row(x0.rows() - 1);
  }
  return sample;
}

TrainResult train(const data::Dataset& dataset, const diffusion::Schedule& sched, const nn::DenoiserConfig& arch,
                  const TrainConfig& cfg) {
  if (dataset.trajectories.empty()) throw std::invalid_argument("train: empty dataset");
  for (const Trajectory& tau : dataset.trajectories)
    if (tau.rows() != arch.h || tau.cols() != arch.m)
      throw std::invalid_argument("train: dataset trajectory shape does not match the architecture");
  if (cfg.batch < 1 || cfg.steps < 0) throw std::invalid_argument("train: batch must be >= 1, steps >= 0");

  TrainResult result{nn::Denoiser(arch), {}};
  result.net.initialize(cfg.seed);
  Adam adam(result.net.parameter_count(), cfg.learning_rate);
  const auto exec = cfg.parallel ? kernels::Exec::parallel : kernels::Exec::serial;

  std::vector<kernels::TrainSample> batch(cfg.batch);
  result.loss_history.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    kernels::for_each_index(cfg.batch, exec, [&](int i) {
      batch[i] = make_training_sample(dataset, sched, cfg.seed, step, i, cfg.condition);
    });
    kernels::BatchGradient g = kernels::loss_gradient_batch(result.net, batch, cfg.condition, exec);
    if (!std::isfinite(g.loss)) throw std::runtime_error("train: loss diverged at step " + std::to_string(step));
    adam.step(result.net.params(), g.gradient);
    result.loss_history.push_back(g.loss);
    if (cfg.on_step) cfg.on_step(step, g.loss);
  }
  return result;
}

}  // namespace edmp::train
