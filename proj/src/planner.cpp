#include "edmp/planner.hpp"

#include "edmp/denoiser.hpp"
#include "edmp/eval.hpp"
#include "edmp/multimodality.hpp"

#include <chrono>
#include <stdexcept>

namespace edmp::planner {

using diffusion::Schedule;
using guidance::GuideConfig;

std::vector<int> partition(int b, int n) {
  if (n < 1 || b < n) throw std::invalid_argument("partition: need at least one trajectory per guide");
  std::vector<int> sizes(n, b / n);
  for (int i = 0; i < b % n; ++i) ++sizes[i];
  return sizes;
}

int guide_of(int i, int b, int n) {
  const int base = b / n;
  const int extra = b % n;
  const int big = extra * (base + 1);
  return i < big ? i / (base + 1) : extra + (i - big) / base;
}

bool selects_before(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  if (a.self_collision != b.self_collision) return !a.self_collision;
  return a.j_swept < b.j_swept;
}

namespace {

Trajectory clipped_mean(const Trajectory& x_t, const Trajectory& eps_pred, int t, const Schedule& sched,
                        const chain::ChainSpec& chain) {
  Trajectory mean = diffusion::posterior_mean(x_t, eps_pred, t, sched);
  chain::clip_trajectory(mean, chain);
  return mean;
}

StepResult finish_step(Trajectory mean, const GuideConfig& guide, const Scene& scene, const chain::ChainSpec& chain,
                       int t, const Schedule& sched, const Trajectory& z, const Trajectory* extra) {
  StepResult out;
  if (guide.weight.at(t, sched.T) != 0.0 || extra) {
    Trajectory g = guidance::guide_gradient(guide, mean, scene, chain, t, sched.T);
    if (extra) g += *extra;
    if (g.allFinite()) {
      mean -= g;
    } else {
      out.fallback = true;
    }
  }
  if (t > 1) mean += sched.sigma(t) * z;
  diffusion::condition_endpoints_inplace(mean, scene.start, scene.goal);
  out.x = std::move(mean);
  return out;
}

}  // namespace

StepResult guided_step(const Trajectory& x_t, const Trajectory& eps_pred, int t, const Schedule& sched,
                       const GuideConfig& guide, const Scene& scene, const chain::ChainSpec& chain,
                       const Trajectory& z, const Trajectory* extra) {
  return finish_step(clipped_mean(x_t, eps_pred, t, sched, chain), guide, scene, chain, t, sched, z, extra);
}

std::vector<StepResult> guided_reverse_step(const nn::Denoiser& net, std::span<const Trajectory> x_t, int t,
                                            const Schedule& sched, const GuideConfig& guide, const Scene& scene,
                                            const chain::ChainSpec& chain, std::uint64_t seed, int first_index,
                                            kernels::Exec exec) {
  const int n = static_cast<int>(x_t.size());
  std::vector<int> ts(n, t);
  std::vector<Trajectory> eps(n);
  kernels::predict_batch(net, x_t, ts, eps, exec);
  std::vector<StepResult> out(n);
  kernels::for_each_index(n, exec, [&](int i) {
    const Trajectory z = diffusion::step_noise(seed, t, first_index + i, x_t[i].rows(), x_t[i].cols());
    out[i] = guided_step(x_t[i], eps[i], t, sched, guide, scene, chain, z);
  });
  return out;
}

PlanResult plan(const nn::Denoiser& net, const Schedule& sched, const Scene& scene, const chain::ChainSpec& chain,
                std::span<const GuideConfig> guides, const PlanConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int h = net.config().h;
  const int m = net.config().m;
  const int b = cfg.batch;
  const int n = static_cast<int>(guides.size());
  if (n == 0) throw std::invalid_argument("plan: no guides");
  if (b < n) throw std::invalid_argument("plan: batch smaller than the number of guides");
  if (m != chain.dof()) throw std::invalid_argument("plan: network joint count differs from the chain");
  if (scene.start.size() != m || scene.goal.size() != m)
    throw std::invalid_argument("plan: start/goal dimension differs from the chain");
  if (!chain.within_limits(scene.start) || !chain.within_limits(scene.goal))
    throw std::invalid_argument("plan: start or goal outside joint limits");
  if (cfg.multimodality != 0.0 && b < 2) throw std::invalid_argument("plan: multimodality needs batch >= 2");
  const auto exec = cfg.parallel ? kernels::Exec::parallel : kernels::Exec::serial;

  std::vector<int> owner(b);
  for (int i = 0; i < b; ++i) owner[i] = guide_of(i, b, n);

  std::vector<Trajectory> xs(b);
  for (int i = 0; i < b; ++i) {
    xs[i] = diffusion::initial_noise(cfg.seed, i, h, m);
    diffusion::condition_endpoints_inplace(xs[i], scene.start, scene.goal);
  }

  PlanResult res;
  res.records.resize(b);
  for (int i = 0; i < b; ++i) res.records[i].guide = owner[i];

  std::vector<int> ts(b);
  std::vector<Trajectory> eps(b);
  std::vector<Trajectory> means(b);
  for (int t = sched.T; t >= 1; --t) {
    std::fill(ts.begin(), ts.end(), t);
    kernels::predict_batch(net, xs, ts, eps, exec);
    if (cfg.multimodality == 0.0) {
      kernels::for_each_index(b, exec, [&](int i) {
        const Trajectory z = diffusion::step_noise(cfg.seed, t, i, h, m);
        StepResult r = guided_step(xs[i], eps[i], t, sched, guides[owner[i]], scene, chain, z);
        xs[i] = std::move(r.x);
        if (r.fallback) res.records[i].fallback = true;
      });
      continue;
    }
    kernels::for_each_index(b, exec, [&](int i) { means[i] = clipped_mean(xs[i], eps[i], t, sched, chain); });
    multimodality::Cost mm = multimodality::multimodality_cost(means);
    kernels::for_each_index(b, exec, [&](int i) {
      Trajectory extra = cfg.multimodality * mm.gradient[i];
      extra.row(0).setZero();
      extra.row(h - 1).setZero();
      const Trajectory z = diffusion::step_noise(cfg.seed, t, i, h, m);
      StepResult r = finish_step(means[i], guides[owner[i]], scene, chain, t, sched, z, &extra);
      xs[i] = std::move(r.x);
      if (r.fallback) res.records[i].fallback = true;
    });
  }

  const auto raw = guidance::obstacle_extents(scene, 0.0, geom::Expansion::none, 1, sched.T);
  Scene bare;
  bare.start = scene.start;
  bare.goal = scene.goal;
  kernels::for_each_index(b, exec, [&](int i) {
    chain::clip_trajectory(xs[i], chain);
    res.records[i].j_swept = guidance::j_swept(xs[i], chain, raw);
    res.records[i].self_collision = !eval::oracle_collision_free(xs[i], bare, chain, cfg.substeps);
    res.records[i].collision_free =
        !res.records[i].self_collision && eval::oracle_collision_free(xs[i], scene, chain, cfg.substeps);
  });

  res.guide_success.assign(n, false);
  for (int i = 0; i < b; ++i) {
    if (selects_before(res.records[i], res.records[res.selected_index])) res.selected_index = i;
    if (res.records[i].collision_free) {
      res.guide_success[owner[i]] = true;
      res.success_any = true;
    }
  }
  res.success = res.records[res.selected_index].collision_free;
  res.selected = xs[res.selected_index];
  res.batch = std::move(xs);
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace edmp::planner
