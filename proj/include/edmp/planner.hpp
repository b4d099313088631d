#pragma once

// Ensemble-guided reverse diffusion. The batch is split into one contiguous
// sub-batch per guide; every reverse step computes the posterior mean, clips
// it to the joint limits, subtracts that guide's cost gradient, adds noise and
// re-imposes the endpoints. The returned trajectory is the batch member with
// the smallest swept-volume cost against the unmodified obstacles, among those
// free of self collision when there are any.

#include "edmp/chain.hpp"
#include "edmp/diffusion.hpp"
#include "edmp/guidance.hpp"
#include "edmp/kernels.hpp"
#include "edmp/scene.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace edmp::nn {
class Denoiser;
}

namespace edmp::planner {

// Sizes of the n sub-batches of a batch of b; the first b mod n get one extra.
std::vector<int> partition(int b, int n);
// Guide index driving batch member i.
int guide_of(int i, int b, int n);

struct StepResult {
  Trajectory x;
  bool fallback = false;  // guide gradient was non-finite and got dropped
};

// One guided step for a single trajectory given its noise prediction and
// step noise z. `extra` (may be null) is added to the guide gradient before
// it is applied; the multimodality term travels this way.
StepResult guided_step(const Trajectory& x_t, const Trajectory& eps_pred, int t, const diffusion::Schedule& sched,
                       const guidance::GuideConfig& guide, const Scene& scene, const chain::ChainSpec& chain,
                       const Trajectory& z, const Trajectory* extra = nullptr);

// One guided step for a sub-batch driven by a single guide. Batch members are
// numbered from `first_index` for noise-stream purposes.
std::vector<StepResult> guided_reverse_step(const nn::Denoiser& net, std::span<const Trajectory> x_t, int t,
                                            const diffusion::Schedule& sched, const guidance::GuideConfig& guide,
                                            const Scene& scene, const chain::ChainSpec& chain, std::uint64_t seed,
                                            int first_index, kernels::Exec exec = kernels::Exec::parallel);

struct PlanConfig {
  int batch = 120;
  std::uint64_t seed = 0;
  int substeps = 8;
  // Multiplier on the batch diversity gradient; 0 disables it.
  double multimodality = 0.0;
  bool parallel = true;
};

struct TrajectoryRecord {
  int guide = 0;
  double j_swept = 0.0;  // final cost, zero clearance and no expansion
  bool collision_free = false;
  bool self_collision = false;  // the chain meets itself at some oracle sample
  bool fallback = false;  // some step dropped a non-finite guide gradient
};

// Selection order: no self collision first, then smaller j_swept. Scanning
// with this strict order keeps the lowest index among ties.
bool selects_before(const TrajectoryRecord& a, const TrajectoryRecord& b);

struct PlanResult {
  int selected_index = 0;
  Trajectory selected;
  std::vector<Trajectory> batch;
  std::vector<TrajectoryRecord> records;
  // Per guide: its sub-batch holds a collision-free trajectory.
  std::vector<bool> guide_success;
  bool success = false;      // selected trajectory passes the oracle
  bool success_any = false;  // some batch member passes the oracle
  double wall_ms = 0.0;
};

// Throws std::invalid_argument when the guide list is empty, the batch is
// smaller than the number of guides, or the scene does not fit the chain and
// network (dimension or joint limits).
PlanResult plan(const nn::Denoiser& net, const diffusion::Schedule& sched, const Scene& scene,
                const chain::ChainSpec& chain, std::span<const guidance::GuideConfig> guides, const PlanConfig& cfg);

}  // namespace edmp::planner
