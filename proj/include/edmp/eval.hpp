#pragma once

// Ground-truth collision oracle and trajectory metrics.

#include "edmp/chain.hpp"
#include "edmp/scene.hpp"

#include <span>
#include <vector>

namespace edmp::eval {

inline constexpr int kDefaultSubsteps = 8;

// Zero overlap with every obstacle (no clearance, no expansion) and no self
// collision at configuration q.
bool waypoint_collision_free(const JointState& q, const Scene& scene, const chain::ChainSpec& chain);

// Checks `substeps` evenly spaced configurations on every segment (segment
// start included) plus the final waypoint. Throws std::invalid_argument on
// substeps < 1.
bool oracle_collision_free(const Trajectory& tau, const Scene& scene, const chain::ChainSpec& chain,
                           int substeps = kDefaultSubsteps);

struct Roughness {
  double ar = 0.0;     // mean adjacent step norm
  double mresg = 0.0;  // max step norm excluding the first and last step
  double rf2w = 0.0;   // first step norm
  double rl2w = 0.0;   // last step norm
};

Roughness roughness(const Trajectory& tau);
// Component-wise mean over the batch.
Roughness roughness(std::span<const Trajectory> batch);

// Mean cosine similarity over unordered distinct pairs. Pairs with a
// zero-norm trajectory count as 0.
double acsm(std::span<const Trajectory> batch);

double path_length(const Trajectory& tau);

}  // namespace edmp::eval
