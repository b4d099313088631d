#pragma once

// Revolute kinematic chains with one cuboid per link.
//
// Joint j's frame is F_j = F_{j-1} * origin_j * Rot(axis_j, q_j) with F_{-1}
// the world frame. Link i is rigidly attached to the frame of joint
// `links[i].joint` through `offset`. An optional attached object (an object in
// the gripper) rides on the last link and is treated as one more body.

#include "edmp/geom.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edmp {

using JointState = Eigen::VectorXd;
// h x m: one row per waypoint.
using Trajectory = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace chain {

using geom::Cuboid;
using geom::Pose;
using geom::Vec3;

struct Joint {
  Vec3 axis = Vec3::UnitZ();
  Pose origin;
  double lo = -3.141592653589793;
  double hi = 3.141592653589793;
};

struct Link {
  int joint = 0;
  Pose offset;
  Vec3 half_extents = Vec3::Constant(0.05);
};

struct Attachment {
  Pose offset;
  Vec3 half_extents = Vec3::Constant(0.05);
};

struct ChainSpec {
  std::string name = "chain";
  std::vector<Joint> joints;
  std::vector<Link> links;
  std::optional<Attachment> attached;

  int dof() const { return static_cast<int>(joints.size()); }
  // Links plus the attached object, if any.
  int num_bodies() const { return static_cast<int>(links.size()) + (attached ? 1 : 0); }
  // Joint frame a body hangs from.
  int body_joint(int body) const;

  JointState lower() const;
  JointState upper() const;
  bool within_limits(const JointState& q, double tol = 0.0) const;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// The 3-joint (z, y, y) desk-scale arm used throughout the tests and tools.
ChainSpec default_chain();

// Everything fk and its derivatives need at one configuration.
struct KinematicState {
  std::vector<Pose> joint_frames;  // world frame of each joint after rotation
  std::vector<Vec3> joint_axes;    // world-frame axis of each joint
  std::vector<Cuboid> bodies;      // links, then attached object
  std::vector<geom::Vertices> vertices;
};

KinematicState kinematics(const ChainSpec& chain, const JointState& q);

std::vector<Cuboid> fk(const ChainSpec& chain, const JointState& q);

// Jacobian of every body vertex with respect to every joint angle. Row
// (body * 8 + vertex) * 3 + axis, column j.
struct FkGradient {
  std::vector<geom::Vertices> vertices;
  Eigen::MatrixXd jacobian;

  auto vertex_rows(int body, int vertex) const {
    return jacobian.middleRows<3>((body * 8 + vertex) * 3);
  }
};

FkGradient fk_grad(const ChainSpec& chain, const JointState& q);

// d(vertex)/dq_j for a point `p` on `body`: axis_j x (p - origin_j) when joint
// j drives the body, else 0. Accumulates  dq += (dL/dp) . dp/dq.
void accumulate_point_gradient(const ChainSpec& chain, const KinematicState& ks, int body,
                               const Vec3& p, const Vec3& d_point, Eigen::Ref<Eigen::VectorXd> dq);

JointState clip_joints(const JointState& q, const ChainSpec& chain);
void clip_trajectory(Trajectory& tau, const ChainSpec& chain);

// Bodies whose joints are at most one apart are exempt from the check.
bool bodies_adjacent(const ChainSpec& chain, int a, int b);
bool self_collision(const ChainSpec& chain, const JointState& q);
bool self_collision(const ChainSpec& chain, const KinematicState& ks);

// Sets (or replaces, with a warning) the attached object.
ChainSpec attach_object(const ChainSpec& chain, const Vec3& half_extents, const Pose& offset);

ChainSpec parse_chain(const std::string& json_text);
ChainSpec read_chain(const std::filesystem::path& path);
std::string chain_to_json(const ChainSpec& chain);
void write_chain(const ChainSpec& chain, const std::filesystem::path& path);

// Attachment file: {"half_extents": [..], "offset": pose}.
Attachment read_attachment(const std::filesystem::path& path);

}  // namespace chain
}  // namespace edmp
