#include "edmp/gradcheck.hpp"

#include "edmp/denoiser.hpp"
#include "edmp/guidance.hpp"
#include "edmp/rng.hpp"

#include <algorithm>
#include <cmath>

namespace edmp::gradcheck {

using geom::Extents;
using geom::Vec3;

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

namespace {

constexpr double kStep = 1e-6;
constexpr int kHorizon = 6;

struct CostCase {
  Trajectory tau;
  std::vector<Extents> obstacles;
};

CostCase random_case(const chain::ChainSpec& chain, std::uint64_t seed, int index) {
  rng::Stream rng(seed, rng::Purpose::test, 7, index);
  CostCase c;
  c.tau.resize(kHorizon, chain.dof());
  JointState a(chain.dof()), b(chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    a[j] = rng.uniform(chain.joints[j].lo, chain.joints[j].hi);
    b[j] = std::clamp(a[j] + rng.uniform(-1.0, 1.0), chain.joints[j].lo, chain.joints[j].hi);
  }
  for (int k = 0; k < kHorizon; ++k) {
    JointState q = a + (b - a) * k / (kHorizon - 1.0);
    for (int j = 0; j < chain.dof(); ++j) q[j] += 0.05 * rng.normal();
    c.tau.row(k) = q.transpose();
  }
  const int n = rng.uniform_int(1, 3);
  for (int i = 0; i < n; ++i) {
    // Centre each obstacle on a random body at a random waypoint.
    const int k = rng.uniform_int(0, kHorizon - 1);
    auto bodies = chain::fk(chain, c.tau.row(k).transpose());
    const auto& body = bodies[rng.uniform_int(0, static_cast<int>(bodies.size()) - 1)];
    Vec3 centre = body.pose.apply(Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}
                                      .cwiseProduct(body.half_extents));
    geom::Cuboid box{geom::Pose::from_xyz_rpy(centre, {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}),
                     Vec3{rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.2)}};
    const auto expansion = static_cast<geom::Expansion>(rng.uniform_int(0, 3));
    const int total = 64;
    c.obstacles.push_back(geom::extents(geom::inflate(box, rng.uniform(0.0, 0.1), expansion,
                                                      rng.uniform_int(1, total), total)));
  }
  return c;
}

template <typename Cost, typename Grad>
SuiteResult run_cost_suite(const std::string& name, const chain::ChainSpec& chain, int cases, std::uint64_t seed,
                           double tol, Cost cost, Grad grad) {
  SuiteResult r{name, cases, 0, 0.0, tol};
  for (int i = 0; i < cases; ++i) {
    CostCase c = random_case(chain, seed, i);
    Trajectory analytic = grad(c.tau, chain, c.obstacles).gradient;
    Trajectory fd(c.tau.rows(), c.tau.cols());
    for (Eigen::Index k = 0; k < c.tau.rows(); ++k)
      for (Eigen::Index j = 0; j < c.tau.cols(); ++j) {
        Trajectory p = c.tau, m = c.tau;
        p(k, j) += kStep;
        m(k, j) -= kStep;
        fd(k, j) = (cost(p, chain, c.obstacles) - cost(m, chain, c.obstacles)) / (2 * kStep);
      }
    const double err = relative_error(Eigen::Map<const Eigen::VectorXd>(analytic.data(), analytic.size()),
                                      Eigen::Map<const Eigen::VectorXd>(fd.data(), fd.size()));
    r.max_rel_err = std::max(r.max_rel_err, err);
    if (!(err <= tol)) ++r.failures;
  }
  return r;
}

}  // namespace

SuiteResult check_intersection(const chain::ChainSpec& chain, int cases, std::uint64_t seed, double tol) {
  return run_cost_suite(
      "j_inter", chain, cases, seed, tol,
      [](const Trajectory& t, const chain::ChainSpec& c, const std::vector<Extents>& o) {
        return guidance::j_inter(t, c, o);
      },
      [](const Trajectory& t, const chain::ChainSpec& c, const std::vector<Extents>& o) {
        return guidance::j_inter_gradient(t, c, o);
      });
}

SuiteResult check_swept(const chain::ChainSpec& chain, int cases, std::uint64_t seed, double tol) {
  return run_cost_suite(
      "j_swept", chain, cases, seed ^ 0x5eedULL, tol,
      [](const Trajectory& t, const chain::ChainSpec& c, const std::vector<Extents>& o) {
        return guidance::j_swept(t, c, o);
      },
      [](const Trajectory& t, const chain::ChainSpec& c, const std::vector<Extents>& o) {
        return guidance::j_swept_gradient(t, c, o);
      });
}

SuiteResult check_denoiser(int cases, std::uint64_t seed, double tol) {
  SuiteResult r{"denoiser", cases, 0, 0.0, tol};
  nn::DenoiserConfig cfg;
  cfg.m = 2;
  cfg.h = 8;
  cfg.widths = {4, 6, 8};
  cfg.kernel = 3;
  cfg.temb_dim = 4;
  for (int i = 0; i < cases; ++i) {
    nn::Denoiser net(cfg);
    net.initialize(rng::derive(seed, rng::Purpose::test, 11, i));
    // Give the zero-initialised head some weight so every layer carries signal.
    rng::Stream rng(seed, rng::Purpose::test, 12, i);
    for (const auto& t : net.tensors())
      if (t.name.rfind("head", 0) == 0)
        for (std::size_t k = 0; k < t.size; ++k) net.params()[t.offset + k] = 0.3 * rng.normal();
    Trajectory x(cfg.h, cfg.m), eps(cfg.h, cfg.m);
    rng.fill_normal(x);
    rng.fill_normal(eps);
    const int t = rng.uniform_int(1, 64);
    const bool exclude = i % 2 == 0;

    std::vector<double> g(net.parameter_count(), 0.0);
    net.loss_and_gradient(x, t, eps, exclude, g);
    Eigen::VectorXd analytic = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    Eigen::VectorXd fd(analytic.size());
    for (std::size_t p = 0; p < net.parameter_count(); ++p) {
      const double v = net.params()[p];
      net.params()[p] = v + kStep;
      const double lp = net.loss(x, t, eps, exclude);
      net.params()[p] = v - kStep;
      const double lm = net.loss(x, t, eps, exclude);
      net.params()[p] = v;
      fd[static_cast<Eigen::Index>(p)] = (lp - lm) / (2 * kStep);
    }
    const double err = relative_error(analytic, fd);
    r.max_rel_err = std::max(r.max_rel_err, err);
    if (!(err <= tol)) ++r.failures;
  }
  return r;
}

std::vector<SuiteResult> run_all(const chain::ChainSpec& chain, int cases, std::uint64_t seed, double tol,
                                 double net_tol) {
  return {check_intersection(chain, cases, seed, tol), check_swept(chain, cases, seed, tol),
          check_denoiser(std::max(1, cases / 20), seed, net_tol)};
}

}  // namespace edmp::gradcheck
