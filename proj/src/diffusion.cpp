#include "edmp/diffusion.hpp"

#include "edmp/denoiser.hpp"
#include "edmp/kernels.hpp"
#include "edmp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace edmp::diffusion {

double Schedule::sigma(int t) const { return std::sqrt(beta.at(t)); }

Schedule make_schedule(int T, double beta_max) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  if (!(beta_max > 0.0 && beta_max < 1.0)) throw std::invalid_argument("schedule: beta_max must be in (0, 1)");
  Schedule s;
  s.T = T;
  s.beta_max = beta_max;
  s.beta.assign(T + 1, 0.0);
  s.alpha.assign(T + 1, 1.0);
  s.alpha_bar.assign(T + 1, 1.0);
  for (int t = 1; t <= T; ++t) {
    s.beta[t] = beta_max * static_cast<double>(t) / static_cast<double>(T);
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  return s;
}

Trajectory forward_diffuse(const Trajectory& x0, int t, const Trajectory& eps, const Schedule& sched) {
  const double ab = sched.alpha_bar.at(t);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

Trajectory posterior_mean(const Trajectory& x_t, const Trajectory& eps_pred, int t, const Schedule& sched) {
  const double a = sched.alpha.at(t);
  const double coef = (1.0 - a) / std::sqrt(1.0 - sched.alpha_bar.at(t));
  return (x_t - coef * eps_pred) / std::sqrt(a);
}

Trajectory reverse_step(const Trajectory& x_t, const Trajectory& eps_pred, int t, const Schedule& sched,
                        const Trajectory& z) {
  Trajectory mean = posterior_mean(x_t, eps_pred, t, sched);
  if (t > 1) mean += sched.sigma(t) * z;
  return mean;
}

Trajectory reverse_step(const nn::Denoiser& net, const Trajectory& x_t, int t, const Schedule& sched,
                        const Trajectory& z) {
  return reverse_step(x_t, net.predict(x_t, t), t, sched, z);
}

void condition_endpoints_inplace(Trajectory& x, const JointState& start, const JointState& goal) {
  if (start.size() != x.cols() || goal.size() != x.cols())
    throw std::invalid_argument("condition_endpoints: dimension mismatch");
  x.row(0) = start.transpose();
  x.row(x.rows() - 1) = goal.transpose();
}

Trajectory condition_endpoints(const Trajectory& x, const JointState& start, const JointState& goal) {
  Trajectory out = x;
  condition_endpoints_inplace(out, start, goal);
  return out;
}

Trajectory initial_noise(std::uint64_t seed, int index, int h, int m) {
  Trajectory x(h, m);
  rng::Stream(seed, rng::Purpose::sample_init, static_cast<std::uint64_t>(index)).fill_normal(x);
  return x;
}

Trajectory step_noise(std::uint64_t seed, int t, int index, int h, int m) {
  Trajectory z(h, m);
  rng::Stream(seed, rng::Purpose::sample_noise, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(index))
      .fill_normal(z);
  return z;
}

std::vector<Trajectory> sample(const nn::Denoiser& net, const Schedule& sched, const JointState& start,
                               const JointState& goal, const SampleConfig& cfg) {
  const int h = net.config().h;
  const int m = net.config().m;
  std::vector<Trajectory> xs(cfg.batch);
  for (int i = 0; i < cfg.batch; ++i) {
    xs[i] = initial_noise(cfg.seed, i, h, m);
    if (cfg.condition) condition_endpoints_inplace(xs[i], start, goal);
  }
  std::vector<int> ts(cfg.batch);
  std::vector<Trajectory> eps(cfg.batch);
  const auto exec = cfg.parallel ? kernels::Exec::parallel : kernels::Exec::serial;
  for (int t = sched.T; t >= 1; --t) {
    std::fill(ts.begin(), ts.end(), t);
    kernels::predict_batch(net, xs, ts, eps, exec);
    kernels::for_each_index(cfg.batch, exec, [&](int i) {
      Trajectory mean = posterior_mean(xs[i], eps[i], t, sched);
      if (cfg.limits) chain::clip_trajectory(mean, *cfg.limits);
      if (t > 1) mean += sched.sigma(t) * step_noise(cfg.seed, t, i, h, m);
      if (cfg.condition) condition_endpoints_inplace(mean, start, goal);
      xs[i] = std::move(mean);
    });
  }
  if (cfg.limits)
    for (auto& x : xs) chain::clip_trajectory(x, *cfg.limits);
  return xs;
}

}  // namespace edmp::diffusion
