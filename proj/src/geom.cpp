#include "edmp/geom.hpp"

#include <algorithm>
#include <cmath>

namespace edmp::geom {

Pose Pose::from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  Mat3 r = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
            Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
               .toRotationMatrix();
  return {r, xyz};
}

Pose Pose::from_axis_angle(const Vec3& axis, double angle) {
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), Vec3::Zero()};
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Vec3 Pose::rpy() const {
  const Mat3& r = rotation;
  double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-9) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: fold everything into yaw.
    roll = 0.0;
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return {roll, pitch, yaw};
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Vec3 vertex_sign(int i) {
  return {(i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0};
}

Vertices vertices(const Cuboid& c) {
  Vertices out;
  for (int i = 0; i < 8; ++i) out[i] = c.pose.apply(vertex_sign(i).cwiseProduct(c.half_extents));
  return out;
}

Extents extents(std::span<const Vec3, 8> vs) {
  Extents e{vs[0], vs[0]};
  for (int i = 1; i < 8; ++i) {
    e.lo = e.lo.cwiseMin(vs[i]);
    e.hi = e.hi.cwiseMax(vs[i]);
  }
  return e;
}

SupportedExtents supported_extents(std::span<const Vec3, 8> vs) {
  SupportedExtents s;
  s.box = {vs[0], vs[0]};
  for (int i = 1; i < 8; ++i) {
    for (int d = 0; d < 3; ++d) {
      if (vs[i][d] < s.box.lo[d]) {
        s.box.lo[d] = vs[i][d];
        s.lo_vertex[d] = i;
      }
      if (vs[i][d] > s.box.hi[d]) {
        s.box.hi[d] = vs[i][d];
        s.hi_vertex[d] = i;
      }
    }
  }
  return s;
}

double overlap_volume(const Extents& a, const Extents& b) {
  double v = 1.0;
  for (int d = 0; d < 3; ++d) {
    double len = std::min(a.hi[d], b.hi[d]) - std::max(a.lo[d], b.lo[d]);
    if (len <= 0.0) return 0.0;
    v *= len;
  }
  return v;
}

OverlapGradient overlap_volume_gradient(const Extents& a, const Extents& b) {
  OverlapGradient g;
  Vec3 len;
  for (int d = 0; d < 3; ++d) {
    len[d] = std::min(a.hi[d], b.hi[d]) - std::max(a.lo[d], b.lo[d]);
    if (len[d] <= 0.0) return g;
  }
  g.volume = len.prod();
  for (int d = 0; d < 3; ++d) {
    double others = len[(d + 1) % 3] * len[(d + 2) % 3];
    // Ties go to `a`; the derivative is one-sided there either way.
    if (a.lo[d] >= b.lo[d]) {
      g.d_a_lo[d] = -others;
    } else {
      g.d_b_lo[d] = -others;
    }
    if (a.hi[d] <= b.hi[d]) {
      g.d_a_hi[d] = others;
    } else {
      g.d_b_hi[d] = others;
    }
  }
  return g;
}

VertexOverlapGradient overlap_volume_vertex_gradient(std::span<const Vec3, 8> va,
                                                     std::span<const Vec3, 8> vb) {
  VertexOverlapGradient out;
  for (auto& v : out.d_a) v.setZero();
  for (auto& v : out.d_b) v.setZero();
  SupportedExtents sa = supported_extents(va);
  SupportedExtents sb = supported_extents(vb);
  OverlapGradient g = overlap_volume_gradient(sa.box, sb.box);
  out.volume = g.volume;
  if (g.volume == 0.0) return out;
  for (int d = 0; d < 3; ++d) {
    out.d_a[sa.lo_vertex[d]][d] += g.d_a_lo[d];
    out.d_a[sa.hi_vertex[d]][d] += g.d_a_hi[d];
    out.d_b[sb.lo_vertex[d]][d] += g.d_b_lo[d];
    out.d_b[sb.hi_vertex[d]][d] += g.d_b_hi[d];
  }
  return out;
}

Extents swept_extents(const Extents& a, const Extents& b) {
  return {a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
}

Cuboid inflate(const Cuboid& c, double clearance, Expansion expansion, int t, int total_steps) {
  Cuboid out = c;
  out.half_extents.array() += clearance;
  Vec3& he = out.half_extents;
  switch (expansion) {
    case Expansion::none:
      break;
    case Expansion::type1:
    case Expansion::type2: {
      double floor = kExpansionRatio * he.maxCoeff();
      double scale = expansion == Expansion::type1
                         ? 1.0
                         : static_cast<double>(t) / static_cast<double>(total_steps);
      for (int d = 0; d < 3; ++d)
        if (he[d] < floor) he[d] += (floor - he[d]) * scale;
      break;
    }
    case Expansion::type3: {
      int axis;
      he.minCoeff(&axis);
      he[axis] += kExpansionDelta;
      break;
    }
  }
  return out;
}

}  // namespace edmp::geom
