#pragma once

// DDPM machinery over joint-space trajectories: linear variance schedule,
// closed-form forward diffusion, ancestral reverse step and endpoint
// conditioning (inpainting of the first and last waypoint).

#include "edmp/chain.hpp"

#include <cstdint>
#include <vector>

namespace edmp {

namespace nn {
class Denoiser;
}

namespace diffusion {

// Arrays are indexed by timestep t in [1, T]; index 0 is unused.
struct Schedule {
  int T = 0;
  double beta_max = 0.02;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  double sigma(int t) const;
};

// beta_t = beta_max * t / T for t = 1..T. Throws std::invalid_argument on
// T < 1 or beta_max outside (0, 1).
Schedule make_schedule(int T, double beta_max = 0.02);

// sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
Trajectory forward_diffuse(const Trajectory& x0, int t, const Trajectory& eps, const Schedule& sched);

// 1/sqrt(alpha_t) (x_t - (1 - alpha_t)/sqrt(1 - abar_t) eps_pred)
Trajectory posterior_mean(const Trajectory& x_t, const Trajectory& eps_pred, int t, const Schedule& sched);

// posterior_mean + sigma_t z, with z ignored at t = 1.
Trajectory reverse_step(const Trajectory& x_t, const Trajectory& eps_pred, int t, const Schedule& sched,
                        const Trajectory& z);
Trajectory reverse_step(const nn::Denoiser& net, const Trajectory& x_t, int t, const Schedule& sched,
                        const Trajectory& z);

void condition_endpoints_inplace(Trajectory& x, const JointState& start, const JointState& goal);
Trajectory condition_endpoints(const Trajectory& x, const JointState& start, const JointState& goal);

struct SampleConfig {
  int batch = 1;
  std::uint64_t seed = 0;
  bool condition = true;
  // Clip the posterior mean to these limits each step (no clipping if null).
  const chain::ChainSpec* limits = nullptr;
  bool parallel = true;
};

// Unguided ancestral sampling from N(0, I), with the same random streams the
// guided planner uses for batch index i.
std::vector<Trajectory> sample(const nn::Denoiser& net, const Schedule& sched, const JointState& start,
                               const JointState& goal, const SampleConfig& cfg);

Trajectory initial_noise(std::uint64_t seed, int index, int h, int m);
Trajectory step_noise(std::uint64_t seed, int t, int index, int h, int m);

}  // namespace diffusion
}  // namespace edmp
