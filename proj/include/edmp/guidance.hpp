#pragma once

// Collision costs over a trajectory and the per-guide gradient that steers
// reverse diffusion.
//
//   j_inter = sum_k sum_links sum_obstacles V(extents(link at s_k), inflated obstacle)
//   j_swept = sum_k sum_links sum_obstacles V(swept(link at s_k, link at s_k+1), inflated obstacle)
//
// Gradients flow through the active min/max vertices and the revolute-joint
// Jacobian axis_j x (p - origin_j).

#include "edmp/chain.hpp"
#include "edmp/geom.hpp"
#include "edmp/scene.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edmp::guidance {

enum class CostKind { intersection, swept };

struct ClearanceSchedule {
  bool linear = false;
  double from = 0.0;  // value at t = T (start of denoising)
  double to = 0.0;    // value as t -> 0

  static ClearanceSchedule constant(double c) { return {false, c, c}; }
  static ClearanceSchedule linear_decay(double from, double to) { return {true, from, to}; }
  double at(int t, int total_steps) const;
  bool operator==(const ClearanceSchedule&) const = default;
};

// w(t) = base + slope * t / T
struct WeightSchedule {
  double base = 0.0;
  double slope = 0.0;

  static WeightSchedule constant(double w) { return {w, 0.0}; }
  double at(int t, int total_steps) const;
  bool operator==(const WeightSchedule&) const = default;
};

struct GuideConfig {
  CostKind cost = CostKind::intersection;
  ClearanceSchedule clearance;
  geom::Expansion expansion = geom::Expansion::none;
  bool normalize = false;
  WeightSchedule weight;

  void validate() const;
  bool operator==(const GuideConfig&) const = default;
};

// The twelve-guide ensemble.
std::vector<GuideConfig> default_guides();

std::string guides_to_json(std::span<const GuideConfig> guides);
std::vector<GuideConfig> parse_guides(const std::string& json_text);
std::vector<GuideConfig> read_guides(const std::filesystem::path& path);
void write_guides(std::span<const GuideConfig> guides, const std::filesystem::path& path);

std::vector<geom::Extents> obstacle_extents(const Scene& scene, double clearance, geom::Expansion expansion, int t,
                                            int total_steps);

double j_inter(const Trajectory& tau, const chain::ChainSpec& chain, std::span<const geom::Extents> obstacles);
double j_swept(const Trajectory& tau, const chain::ChainSpec& chain, std::span<const geom::Extents> obstacles);

double j_inter(const Trajectory& tau, const Scene& scene, const chain::ChainSpec& chain, double clearance,
               geom::Expansion expansion, int t, int total_steps);
double j_swept(const Trajectory& tau, const Scene& scene, const chain::ChainSpec& chain, double clearance,
               geom::Expansion expansion, int t, int total_steps);

struct CostGradient {
  double cost = 0.0;
  Trajectory gradient;  // dJ/dtau, h x m
};

CostGradient j_inter_gradient(const Trajectory& tau, const chain::ChainSpec& chain,
                              std::span<const geom::Extents> obstacles);
CostGradient j_swept_gradient(const Trajectory& tau, const chain::ChainSpec& chain,
                              std::span<const geom::Extents> obstacles);

// Weighted (and optionally unit-Frobenius-normalised) cost gradient with the
// endpoint rows zeroed. The planner subtracts it from the posterior mean.
Trajectory guide_gradient(const GuideConfig& cfg, const Trajectory& tau, const Scene& scene,
                          const chain::ChainSpec& chain, int t, int total_steps);

}  // namespace edmp::guidance
