#pragma once

// Oriented-cuboid geometry used by the collision costs.
//
// Every body (robot link or obstacle) is a cuboid with a rigid pose. Collision
// measures work on axis-aligned extents of the eight world-frame vertices, so
// a rotated box is approximated by its (larger) AABB. The overlap volume is the
// product of the per-axis overlaps, clamped at zero per axis.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <span>

namespace edmp::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_xyz(const Vec3& xyz) { return {Mat3::Identity(), xyz}; }
  // Fixed-axis roll/pitch/yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Pose from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);
  static Pose from_axis_angle(const Vec3& axis, double angle);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }
  Mat4 matrix() const;
  Vec3 rpy() const;
};

// True when `r` is orthonormal with determinant +1 within `tol`.
bool is_rotation(const Mat3& r, double tol = 1e-9);

struct Cuboid {
  Pose pose;
  Vec3 half_extents = Vec3::Constant(0.5);
};

using Vertices = std::array<Vec3, 8>;

struct Extents {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 size() const { return hi - lo; }
  double volume() const { return size().prod(); }
};

// Corner i has sign pattern (bit0 -> x, bit1 -> y, bit2 -> z), bit set = '+':
// ---, +--, -+-, ++-, --+, +-+, -++, +++.
Vertices vertices(const Cuboid& c);
Vec3 vertex_sign(int i);

Extents extents(std::span<const Vec3, 8> vs);
inline Extents extents(const Vertices& vs) { return extents(std::span<const Vec3, 8>(vs)); }
inline Extents extents(const Cuboid& c) { return extents(vertices(c)); }

// Extents plus the vertex index that attains each bound, which is the active
// branch for differentiating through the min/max.
struct SupportedExtents {
  Extents box;
  std::array<int, 3> lo_vertex{};
  std::array<int, 3> hi_vertex{};
};
SupportedExtents supported_extents(std::span<const Vec3, 8> vs);
inline SupportedExtents supported_extents(const Vertices& vs) {
  return supported_extents(std::span<const Vec3, 8>(vs));
}

double overlap_volume(const Extents& a, const Extents& b);

// Partial derivatives of overlap_volume(a, b) with respect to a.lo, a.hi,
// b.lo and b.hi. Disjoint axes (and every axis when the volume is zero) carry
// subgradient 0.
struct OverlapGradient {
  double volume = 0.0;
  Vec3 d_a_lo = Vec3::Zero();
  Vec3 d_a_hi = Vec3::Zero();
  Vec3 d_b_lo = Vec3::Zero();
  Vec3 d_b_hi = Vec3::Zero();
};
OverlapGradient overlap_volume_gradient(const Extents& a, const Extents& b);

// Gradient of overlap_volume(extents(va), extents(vb)) with respect to all 16
// vertex positions.
struct VertexOverlapGradient {
  double volume = 0.0;
  std::array<Vec3, 8> d_a{};
  std::array<Vec3, 8> d_b{};
};
VertexOverlapGradient overlap_volume_vertex_gradient(std::span<const Vec3, 8> va,
                                                     std::span<const Vec3, 8> vb);

Extents swept_extents(const Extents& a, const Extents& b);

enum class Expansion { none, type1, type2, type3 };

inline constexpr double kExpansionRatio = 0.25;   // type1/type2 aspect floor
inline constexpr double kExpansionDelta = 0.1;    // type3 absolute widening (m)

// Grows half extents by `clearance`, then applies the expansion policy.
// `t` is the current denoising step in [1, T].
Cuboid inflate(const Cuboid& c, double clearance, Expansion expansion, int t, int total_steps);

}  // namespace edmp::geom
