#include "edmp/eval.hpp"

#include "edmp/multimodality.hpp"

#include <algorithm>
#include <stdexcept>

namespace edmp::eval {

namespace {

std::vector<geom::Extents> raw_extents(const Scene& scene) {
  std::vector<geom::Extents> out;
  out.reserve(scene.obstacles.size());
  for (const Obstacle& o : scene.obstacles) out.push_back(geom::extents(o.box()));
  return out;
}

bool clear(const JointState& q, std::span<const geom::Extents> obstacles, const chain::ChainSpec& chain) {
  chain::KinematicState ks = chain::kinematics(chain, q);
  for (const auto& v : ks.vertices) {
    const geom::Extents e = geom::extents(v);
    for (const geom::Extents& o : obstacles)
      if (geom::overlap_volume(e, o) > 0.0) return false;
  }
  return !chain::self_collision(chain, ks);
}

Eigen::VectorXd step_norms(const Trajectory& tau) {
  const Eigen::Index n = tau.rows() - 1;
  Eigen::VectorXd s(std::max<Eigen::Index>(n, 0));
  for (Eigen::Index k = 0; k < n; ++k) s(k) = (tau.row(k + 1) - tau.row(k)).norm();
  return s;
}

}  // namespace

bool waypoint_collision_free(const JointState& q, const Scene& scene, const chain::ChainSpec& chain) {
  auto obs = raw_extents(scene);
  return clear(q, obs, chain);
}

bool oracle_collision_free(const Trajectory& tau, const Scene& scene, const chain::ChainSpec& chain,
                           int substeps) {
  if (substeps < 1) throw std::invalid_argument("oracle: substeps must be >= 1");
  auto obs = raw_extents(scene);
  const Eigen::Index h = tau.rows();
  for (Eigen::Index k = 0; k + 1 < h; ++k) {
    const JointState a = tau.row(k).transpose();
    const JointState b = tau.row(k + 1).transpose();
    for (int s = 0; s < substeps; ++s) {
      const double u = static_cast<double>(s) / substeps;
      if (!clear(a + u * (b - a), obs, chain)) return false;
    }
  }
  return h == 0 || clear(tau.row(h - 1).transpose(), obs, chain);
}

Roughness roughness(const Trajectory& tau) {
  Roughness r;
  const Eigen::VectorXd s = step_norms(tau);
  const Eigen::Index n = s.size();
  if (n == 0) return r;
  r.ar = s.mean();
  r.rf2w = s(0);
  r.rl2w = s(n - 1);
  for (Eigen::Index k = 1; k + 1 < n; ++k) r.mresg = std::max(r.mresg, s(k));
  return r;
}

Roughness roughness(std::span<const Trajectory> batch) {
  Roughness mean;
  if (batch.empty()) return mean;
  for (const Trajectory& tau : batch) {
    Roughness r = roughness(tau);
    mean.ar += r.ar;
    mean.mresg += r.mresg;
    mean.rf2w += r.rf2w;
    mean.rl2w += r.rl2w;
  }
  const double n = static_cast<double>(batch.size());
  mean.ar /= n;
  mean.mresg /= n;
  mean.rf2w /= n;
  mean.rl2w /= n;
  return mean;
}

double acsm(std::span<const Trajectory> batch) {
  Eigen::MatrixXd c = multimodality::cosine_similarity(batch);
  const Eigen::Index b = c.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < b; ++i)
    for (Eigen::Index j = i + 1; j < b; ++j) sum += c(i, j);
  return sum / (static_cast<double>(b) * (b - 1) / 2.0);
}

double path_length(const Trajectory& tau) { return step_norms(tau).sum(); }

}  // namespace edmp::eval
