#pragma once

#include "edmp/chain.hpp"
#include "edmp/geom.hpp"
#include "edmp/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>

namespace testing {

using edmp::Trajectory;
using edmp::geom::Extents;
using edmp::geom::Vec3;

// Counts voxel centres (spacing `res`) that lie inside both boxes, scanning
// only the voxels of a.
inline double voxel_overlap(const Extents& a, const Extents& b, double res = 1e-3) {
  long count = 0;
  const int nx = static_cast<int>(std::ceil((a.hi.x() - a.lo.x()) / res));
  const int ny = static_cast<int>(std::ceil((a.hi.y() - a.lo.y()) / res));
  const int nz = static_cast<int>(std::ceil((a.hi.z() - a.lo.z()) / res));
  for (int i = 0; i < nx; ++i) {
    const double x = a.lo.x() + (i + 0.5) * res;
    if (x > a.hi.x() || x < b.lo.x() || x > b.hi.x()) continue;
    for (int j = 0; j < ny; ++j) {
      const double y = a.lo.y() + (j + 0.5) * res;
      if (y > a.hi.y() || y < b.lo.y() || y > b.hi.y()) continue;
      for (int k = 0; k < nz; ++k) {
        const double z = a.lo.z() + (k + 0.5) * res;
        if (z <= a.hi.z() && z >= b.lo.z() && z <= b.hi.z()) ++count;
      }
    }
  }
  return count * res * res * res;
}

// Central differences of a scalar function of a trajectory.
inline Trajectory fd_gradient(const Trajectory& x, const std::function<double(const Trajectory&)>& f,
                              double step = 1e-6) {
  Trajectory g(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.rows(); ++k)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      Trajectory p = x, m = x;
      p(k, j) += step;
      m(k, j) -= step;
      g(k, j) = (f(p) - f(m)) / (2 * step);
    }
  return g;
}

inline double rel_err(const Trajectory& a, const Trajectory& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

inline bool bitwise_equal(const Trajectory& a, const Trajectory& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// Planar chain of unit links along x with z-axis joints.
inline edmp::chain::ChainSpec planar_chain(int n) {
  using namespace edmp::chain;
  ChainSpec c;
  c.name = "planar" + std::to_string(n);
  for (int i = 0; i < n; ++i) {
    Joint j;
    j.axis = Vec3::UnitZ();
    j.origin = edmp::geom::Pose::from_xyz(i == 0 ? Vec3::Zero() : Vec3(1.0, 0.0, 0.0));
    c.joints.push_back(j);
    Link l;
    l.joint = i;
    l.offset = edmp::geom::Pose::from_xyz({0.5, 0.0, 0.0});
    l.half_extents = {0.45, 0.05, 0.05};
    c.links.push_back(l);
  }
  return c;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("edmp-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
