#pragma once

// Procedural scenes (four archetypes) and procedural prior trajectories, plus
// scene file I/O.

#include "edmp/chain.hpp"
#include "edmp/dataset.hpp"
#include "edmp/scene.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace edmp::worldgen {

enum class SceneKind { tabletop, shelf, cubby, sphere_field };

inline constexpr std::array<SceneKind, 4> kAllKinds = {SceneKind::tabletop, SceneKind::shelf, SceneKind::cubby,
                                                       SceneKind::sphere_field};

std::string to_string(SceneKind kind);
// Throws std::invalid_argument on an unknown name.
SceneKind parse_kind(const std::string& name);

struct WorldgenConfig {
  int version = 1;
  geom::Vec3 workspace_lo{-1.0, -1.0, 0.0};
  geom::Vec3 workspace_hi{1.0, 1.0, 2.0};
  int min_obstacles = 3;
  int max_obstacles = 8;
  double shelf_thickness_lo = 0.02;  // full slab thickness (m)
  double shelf_thickness_hi = 0.05;
  // Obstacles keep out of this box so the base link stays free.
  geom::Vec3 keepout_lo{-0.2, -0.2, 0.0};
  geom::Vec3 keepout_hi{0.2, 0.2, 0.9};
  double min_start_goal_distance = 1.0;  // joint-space L2 (rad)
  int attempts = 1000;
  int h = 50;
  int max_via = 2;
  double via_sigma = 0.5;

  void validate() const;
};

std::string config_to_json(const WorldgenConfig& cfg);
// Fields not present keep their defaults.
WorldgenConfig parse_config(const std::string& json_text);
WorldgenConfig read_config(const std::filesystem::path& path);

// Pure function of (kind, chain, seed, cfg). Throws std::runtime_error naming
// the seed when no valid start/goal is found within cfg.attempts.
Scene gen_scene(SceneKind kind, const chain::ChainSpec& chain, std::uint64_t seed, const WorldgenConfig& cfg = {});

// Uniform joint-space interpolation with h waypoints, endpoints exact.
Trajectory straight_line(const JointState& start, const JointState& goal, int h);

// Like gen_scene, but the start/goal pair must also be joined by a straight
// line of cfg.h waypoints that the oracle finds collision-free for `chain`.
Scene gen_straight_line_scene(SceneKind kind, const chain::ChainSpec& chain, std::uint64_t seed,
                              const WorldgenConfig& cfg = {}, int substeps = 8);

// Minimum-jerk blend s(u) = 10u^3 - 15u^4 + 6u^5.
double quintic(double u);

// h waypoints through `points` (start, vias..., goal), each segment given time
// proportional to its joint-space length and traversed with the quintic
// profile.
Trajectory quintic_through(std::span<const JointState> points, int h);

Trajectory gen_prior_trajectory(const chain::ChainSpec& chain, std::uint64_t seed, const WorldgenConfig& cfg = {});

// Trajectory i is gen_prior_trajectory with a seed derived from (seed, i).
// Failures are rethrown naming the index.
data::Dataset gen_dataset(const chain::ChainSpec& chain, int count, std::uint64_t seed,
                          const WorldgenConfig& cfg = {}, bool parallel = true);

std::string scene_to_json(const Scene& scene);
// When `chain` is given, start/goal must match its dof and limits; errors name
// the joint index.
Scene parse_scene(const std::string& json_text, const chain::ChainSpec* chain = nullptr);
Scene read_scene(const std::filesystem::path& path, const chain::ChainSpec* chain = nullptr);
void write_scene(const Scene& scene, const std::filesystem::path& path);

}  // namespace edmp::worldgen
