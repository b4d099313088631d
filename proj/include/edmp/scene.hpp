#pragma once

#include "edmp/chain.hpp"
#include "edmp/geom.hpp"

#include <string>
#include <vector>

namespace edmp {

// Obstacles keep the exact numbers they were written with (center, half
// extents, roll/pitch/yaw) so scene files round-trip bit-for-bit.
struct Obstacle {
  geom::Vec3 center = geom::Vec3::Zero();
  geom::Vec3 half_extents = geom::Vec3::Constant(0.1);
  geom::Vec3 rpy = geom::Vec3::Zero();

  geom::Cuboid box() const { return {geom::Pose::from_xyz_rpy(center, rpy), half_extents}; }
  bool operator==(const Obstacle&) const = default;
};

struct Scene {
  std::string name;
  std::string kind;
  std::vector<Obstacle> obstacles;
  JointState start;
  JointState goal;

  std::vector<geom::Cuboid> cuboids() const {
    std::vector<geom::Cuboid> out;
    out.reserve(obstacles.size());
    for (const Obstacle& o : obstacles) out.push_back(o.box());
    return out;
  }
};

}  // namespace edmp
