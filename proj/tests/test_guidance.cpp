#include "edmp/denoiser.hpp"
#include "edmp/diffusion.hpp"
#include "edmp/eval.hpp"
#include "edmp/guidance.hpp"
#include "edmp/multimodality.hpp"
#include "edmp/planner.hpp"
#include "edmp/worldgen.hpp"

#include "support.hpp"

#include <cmath>

using namespace edmp;
using geom::Expansion;
using geom::Extents;
using geom::Vec3;
using guidance::GuideConfig;

namespace {

// One z-axis joint whose link is the axis-aligned unit cube [0,1]^3 at q = 0.
chain::ChainSpec cube_chain() {
  chain::ChainSpec c;
  c.name = "cube";
  c.joints.push_back({Vec3::UnitZ(), geom::Pose::identity(), -3.0, 3.0});
  c.links.push_back({0, geom::Pose::from_xyz({0.5, 0.5, 0.5}), Vec3::Constant(0.5)});
  return c;
}

Obstacle obstacle(Vec3 center, Vec3 half) { return {center, half, Vec3::Zero()}; }

Scene scene_with(std::vector<Obstacle> obs, JointState s, JointState g) {
  Scene sc;
  sc.name = "test";
  sc.obstacles = std::move(obs);
  sc.start = std::move(s);
  sc.goal = std::move(g);
  return sc;
}

Trajectory column(std::initializer_list<double> q) {
  Trajectory t(static_cast<Eigen::Index>(q.size()), 1);
  Eigen::Index k = 0;
  for (double v : q) t(k++, 0) = v;
  return t;
}

// Link of planar_chain(1) at angle q: box of half (0.45, 0.05, 0.05) centred
// 0.5 along the link direction.
Extents planar_link_extents(double q) {
  const double c = std::abs(std::cos(q)), s = std::abs(std::sin(q));
  const Vec3 centre(0.5 * std::cos(q), 0.5 * std::sin(q), 0.0);
  const Vec3 half(0.45 * c + 0.05 * s, 0.45 * s + 0.05 * c, 0.05);
  return {centre - half, centre + half};
}

Extents obstacle_extents(const Obstacle& o) { return {o.center - o.half_extents, o.center + o.half_extents}; }

GuideConfig intersection_guide(double weight, double clearance = 0.0) {
  GuideConfig g;
  g.cost = guidance::CostKind::intersection;
  g.clearance = guidance::ClearanceSchedule::constant(clearance);
  g.weight = guidance::WeightSchedule::constant(weight);
  return g;
}

nn::Denoiser small_net(int h, std::uint64_t seed) {
  nn::DenoiserConfig a;
  a.m = 3;
  a.h = h;
  a.widths = {8, 8, 16};
  a.kernel = 3;
  a.temb_dim = 8;
  nn::Denoiser net(a);
  net.initialize(seed);
  rng::Stream r(seed, rng::Purpose::test, 1);
  for (const auto& t : net.tensors())
    if (t.name.rfind("head", 0) == 0)
      for (std::size_t k = 0; k < t.size; ++k) net.params()[t.offset + k] = 0.1 * r.normal();
  return net;
}

}  // namespace

TEST_CASE("schedules evaluate as configured") {
  const auto lin = guidance::ClearanceSchedule::linear_decay(0.15, 0.01);
  CHECK(lin.at(64, 64) == doctest::Approx(0.15));
  CHECK(lin.at(0, 64) == doctest::Approx(0.01));
  CHECK(lin.at(32, 64) == doctest::Approx(0.08));
  CHECK(guidance::ClearanceSchedule::constant(0.05).at(7, 64) == 0.05);
  const guidance::WeightSchedule w{1.4, 1.0};
  CHECK(w.at(64, 64) == doctest::Approx(2.4));
  CHECK(w.at(16, 64) == doctest::Approx(1.65));
}

TEST_CASE("default ensemble has twelve valid guides, five intersection then seven swept") {
  const auto guides = guidance::default_guides();
  REQUIRE(guides.size() == 12);
  for (std::size_t i = 0; i < guides.size(); ++i) {
    CHECK_NOTHROW(guides[i].validate());
    CHECK(guides[i].cost == (i < 5 ? guidance::CostKind::intersection : guidance::CostKind::swept));
  }
  for (int i = 0; i < 5; ++i) {
    CHECK(guides[i].expansion == Expansion::none);
    CHECK_FALSE(guides[i].normalize);
    CHECK(guides[i].weight == guidance::WeightSchedule{1.4, 1.0});
  }
  CHECK(guides[4].clearance == guidance::ClearanceSchedule::linear_decay(0.15, 0.01));
}

TEST_CASE("guide validation rejects negative parameters") {
  GuideConfig g = intersection_guide(1.0);
  g.clearance = guidance::ClearanceSchedule::constant(-0.1);
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = intersection_guide(-1.0);
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("guide files round-trip and reject malformed input") {
  const auto guides = guidance::default_guides();
  const auto back = guidance::parse_guides(guidance::guides_to_json(guides));
  CHECK(back == guides);
  CHECK_THROWS(guidance::parse_guides("{\"format\":\"edmp-guides-v1\",\"guides\":[{\"cost\":\"volume\"}]}"));
  CHECK_THROWS(guidance::parse_guides("{\"guides\":[]}"));
  CHECK_THROWS(guidance::parse_guides("not json"));
}

TEST_CASE("j_inter of a single overlapping waypoint matches the voxel oracle") {
  const auto chain = cube_chain();
  const Obstacle ob = obstacle({1.0, 0.3, 0.6}, {0.5, 0.5, 0.3});
  const Scene sc = scene_with({ob}, JointState::Zero(1), JointState::Zero(1));
  const Trajectory tau = column({0.0});
  const double oracle = testing::voxel_overlap({Vec3::Zero(), Vec3::Ones()}, obstacle_extents(ob), 1e-2);
  CHECK(oracle == doctest::Approx(0.24).epsilon(0.01));
  CHECK(guidance::j_inter(tau, sc, chain, 0.0, Expansion::none, 1, 1) == doctest::Approx(0.24).epsilon(1e-12));
}

TEST_CASE("costs vanish on an empty scene and away from obstacles") {
  const auto chain = testing::planar_chain(2);
  const Trajectory tau = Trajectory::Random(6, 2);
  const Scene empty = scene_with({}, tau.row(0).transpose(), tau.row(5).transpose());
  CHECK(guidance::j_inter(tau, empty, chain, 0.1, Expansion::type3, 3, 10) == 0.0);
  CHECK(guidance::j_swept(tau, empty, chain, 0.1, Expansion::type3, 3, 10) == 0.0);
  const Scene far = scene_with({obstacle({5, 5, 5}, {0.2, 0.2, 0.2})}, tau.row(0).transpose(), tau.row(5).transpose());
  CHECK(guidance::j_inter(tau, far, chain, 0.1, Expansion::none, 3, 10) == 0.0);
  CHECK(guidance::j_swept(tau, far, chain, 0.1, Expansion::none, 3, 10) == 0.0);
  CHECK(guidance::guide_gradient(intersection_guide(2.0, 0.1), tau, far, chain, 3, 10).isZero(0.0));
}

TEST_CASE("stationary trajectory: j_swept sums h-1 copies of the per-waypoint overlap") {
  const auto chain = chain::default_chain();
  const JointState q(Eigen::Vector3d(0.3, 0.4, -0.5));
  const auto bodies = chain::fk(chain, q);
  const Vec3 c = bodies[2].pose.translation;
  const Scene sc = scene_with({obstacle(c + Vec3(0.05, 0.0, 0.02), {0.1, 0.1, 0.1})}, q, q);
  const int h = 7;
  Trajectory tau(h, 3);
  for (int k = 0; k < h; ++k) tau.row(k) = q.transpose();
  const double inter = guidance::j_inter(tau, sc, chain, 0.0, Expansion::none, 1, 1);
  const double swept = guidance::j_swept(tau, sc, chain, 0.0, Expansion::none, 1, 1);
  REQUIRE(inter > 0.0);
  CHECK(swept == doctest::Approx(inter * (h - 1) / h).epsilon(1e-12));
}

TEST_CASE("straddling a thin wall: swept cost sees the tunnel, intersection cost does not") {
  const auto chain = testing::planar_chain(1);
  const Obstacle wall = obstacle({0.55, 0.0, 0.0}, {0.25, 0.01, 0.2});
  const Scene sc = scene_with({wall}, JointState::Constant(1, -1.0), JointState::Constant(1, 1.0));
  const Trajectory tau = column({-1.0, 1.0});
  CHECK(guidance::j_inter(tau, sc, chain, 0.0, Expansion::none, 1, 1) == 0.0);

  const Extents a = planar_link_extents(-1.0), b = planar_link_extents(1.0);
  const Extents box{a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
  const double oracle = testing::voxel_overlap(obstacle_extents(wall), box, 1e-3);
  const double swept = guidance::j_swept(tau, sc, chain, 0.0, Expansion::none, 1, 1);
  CHECK(swept > 0.0);
  CHECK(swept == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("obstacle clearance inflates every half extent") {
  const Scene sc = scene_with({obstacle({1, 2, 3}, {0.1, 0.2, 0.3})}, {}, {});
  const auto ext = guidance::obstacle_extents(sc, 0.05, Expansion::none, 1, 1);
  REQUIRE(ext.size() == 1);
  CHECK((ext[0].lo - Vec3(0.85, 1.75, 2.65)).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((ext[0].hi - Vec3(1.15, 2.25, 3.35)).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("guide gradient matches finite differences of the weighted cost") {
  const auto chain = chain::default_chain();
  rng::Stream r(3, rng::Purpose::test);
  const int h = 6, t = 10, T = 20;
  int checked = 0;
  for (int n = 0; n < 20; ++n) {
    Trajectory tau(h, 3);
    for (Eigen::Index i = 0; i < tau.size(); ++i) tau.data()[i] = r.uniform(-1.5, 1.5);
    const auto bodies = chain::fk(chain, tau.row(2).transpose());
    const Vec3 c = bodies[1 + n % 2].pose.translation;
    const Scene sc = scene_with({obstacle(c + Vec3(0.03, -0.02, 0.04), {0.12, 0.09, 0.15})},
                                tau.row(0).transpose(), tau.row(h - 1).transpose());
    for (auto kind : {guidance::CostKind::intersection, guidance::CostKind::swept}) {
      GuideConfig g = intersection_guide(0.0, 0.02);
      g.cost = kind;
      g.weight = {1.4, 1.0};
      const double w = g.weight.at(t, T);
      auto cost = [&](const Trajectory& x) {
        return w * (kind == guidance::CostKind::intersection
                        ? guidance::j_inter(x, sc, chain, 0.02, Expansion::none, t, T)
                        : guidance::j_swept(x, sc, chain, 0.02, Expansion::none, t, T));
      };
      if (cost(tau) == 0.0) continue;
      Trajectory fd = testing::fd_gradient(tau, cost);
      fd.row(0).setZero();
      fd.row(h - 1).setZero();
      const Trajectory an = guidance::guide_gradient(g, tau, sc, chain, t, T);
      CHECK(testing::rel_err(an, fd) <= 1e-4);
      CHECK(an.row(0).isZero(0.0));
      CHECK(an.row(h - 1).isZero(0.0));
      ++checked;
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("normalised gradient has unit norm and zero weight gives zero") {
  const auto chain = chain::default_chain();
  const JointState q(Eigen::Vector3d(0.2, 0.5, 0.3));
  const Vec3 c = chain::fk(chain, q)[2].pose.translation;
  const Scene sc = scene_with({obstacle(c, {0.1, 0.1, 0.1})}, q, q);
  Trajectory tau(5, 3);
  for (int k = 0; k < 5; ++k) tau.row(k) = (q + Eigen::Vector3d::Constant(0.01 * k)).transpose();
  GuideConfig g = intersection_guide(1.0);
  g.normalize = true;
  CHECK(guidance::guide_gradient(g, tau, sc, chain, 5, 10).norm() == doctest::Approx(1.0).epsilon(1e-12));
  g.weight = guidance::WeightSchedule::constant(0.05);
  CHECK(guidance::guide_gradient(g, tau, sc, chain, 5, 10).norm() == doctest::Approx(0.05).epsilon(1e-12));
  g.weight = guidance::WeightSchedule::constant(0.0);
  CHECK(guidance::guide_gradient(g, tau, sc, chain, 5, 10).isZero(0.0));
}

TEST_CASE("guided step on a scalar toy shifts the mean against the cost gradient") {
  const auto chain = testing::planar_chain(1);
  const auto sched = diffusion::make_schedule(8);
  // Link sweeps about z; a box above angle 0.35 clips the middle waypoint.
  const Scene sc = scene_with({obstacle({0.6, 0.42, 0.0}, {0.1, 0.1, 0.1})}, JointState::Constant(1, -1.0),
                              JointState::Constant(1, 1.0));
  const Trajectory x_t = column({-1.0, 0.35, 1.0});
  const Trajectory eps = column({0.2, -0.1, 0.3});
  const Trajectory z = Trajectory::Zero(3, 1);
  const double w = 0.7;
  const int t = 1;
  const auto step = planner::guided_step(x_t, eps, t, sched, intersection_guide(w), sc, chain, z);
  const Trajectory mu = diffusion::posterior_mean(x_t, eps, t, sched);
  auto j = [&](double q) { return guidance::j_inter(column({q}), sc, chain, 0.0, Expansion::none, t, 8); };
  const double d = (j(mu(1, 0) + 1e-7) - j(mu(1, 0) - 1e-7)) / 2e-7;
  REQUIRE(d != 0.0);
  CHECK_FALSE(step.fallback);
  CHECK(step.x(1, 0) == doctest::Approx(mu(1, 0) - w * d).epsilon(1e-6));
  CHECK(step.x(0, 0) == -1.0);
  CHECK(step.x(2, 0) == 1.0);
}

TEST_CASE("guided step with an empty scene equals clip, unguided step and conditioning") {
  const auto chain = chain::default_chain();
  const auto sched = diffusion::make_schedule(16);
  rng::Stream r(4, rng::Purpose::test);
  Trajectory x(8, 3), eps(8, 3), z(8, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = 3.0 * r.normal();
    eps.data()[i] = r.normal();
    z.data()[i] = r.normal();
  }
  const JointState s = Eigen::Vector3d(0.1, 0.2, 0.3), g = Eigen::Vector3d(-0.4, 0.5, 0.6);
  const Scene sc = scene_with({}, s, g);
  for (int t : {1, 5, 16}) {
    Trajectory expect = diffusion::posterior_mean(x, eps, t, sched);
    chain::clip_trajectory(expect, chain);
    if (t > 1) expect += sched.sigma(t) * z;
    diffusion::condition_endpoints_inplace(expect, s, g);
    const auto step = planner::guided_step(x, eps, t, sched, guidance::default_guides()[6], sc, chain, z);
    CHECK(testing::bitwise_equal(step.x, expect));
  }
}

TEST_CASE("non-finite guide gradient falls back to the unguided step") {
  const auto chain = testing::planar_chain(1);
  const auto sched = diffusion::make_schedule(8);
  const Scene sc = scene_with({obstacle({0.6, 0.25, 0.0}, {0.1, 0.1, 0.1})}, JointState::Constant(1, -1.0),
                              JointState::Constant(1, 1.0));
  const Trajectory x_t = column({-1.0, 0.35, 1.0});
  const Trajectory eps = Trajectory::Zero(3, 1);
  const Trajectory z = Trajectory::Zero(3, 1);
  const Trajectory bad = column({0.0, std::nan(""), 0.0});
  const auto step = planner::guided_step(x_t, eps, 3, sched, intersection_guide(1.0), sc, chain, z, &bad);
  CHECK(step.fallback);
  Trajectory expect = diffusion::posterior_mean(x_t, eps, 3, sched);
  chain::clip_trajectory(expect, chain);
  diffusion::condition_endpoints_inplace(expect, sc.start, sc.goal);
  CHECK(testing::bitwise_equal(step.x, expect));
}

TEST_CASE("batch partition gives the first b mod n guides one extra member") {
  CHECK(planner::partition(120, 12) == std::vector<int>(12, 10));
  CHECK(planner::partition(14, 4) == std::vector<int>{4, 4, 3, 3});
  CHECK(planner::guide_of(0, 14, 4) == 0);
  CHECK(planner::guide_of(3, 14, 4) == 0);
  CHECK(planner::guide_of(4, 14, 4) == 1);
  CHECK(planner::guide_of(13, 14, 4) == 3);
  for (int i = 0; i < 120; ++i) CHECK(planner::guide_of(i, 120, 12) == i / 10);
}

TEST_CASE("selection prefers no self collision, then smaller swept volume") {
  planner::TrajectoryRecord clean, folded, cheap;
  clean.j_swept = 0.5;
  folded.j_swept = 0.0;
  folded.self_collision = true;
  cheap.j_swept = 0.1;
  CHECK(planner::selects_before(clean, folded));
  CHECK_FALSE(planner::selects_before(folded, clean));
  CHECK(planner::selects_before(cheap, clean));
  CHECK_FALSE(planner::selects_before(clean, clean));
}

TEST_CASE("plan: endpoints exact, selection optimal, records consistent") {
  const auto chain = chain::default_chain();
  const auto net = small_net(10, 2);
  const auto sched = diffusion::make_schedule(6);
  const Scene sc = worldgen::gen_scene(worldgen::SceneKind::shelf, chain, 8);
  const auto guides = guidance::default_guides();
  planner::PlanConfig cfg;
  cfg.batch = 26;
  cfg.seed = 3;
  const auto res = planner::plan(net, sched, sc, chain, guides, cfg);
  REQUIRE(res.batch.size() == 26);
  REQUIRE(res.records.size() == 26);
  // Oracle: lexicographic (self collision at any substep, j_swept, index).
  std::pair<bool, double> best{true, INFINITY};
  int best_i = -1;
  bool any = false;
  for (int i = 0; i < 26; ++i) {
    const Trajectory& x = res.batch[i];
    CHECK(x.row(0).transpose() == sc.start);
    CHECK(x.row(x.rows() - 1).transpose() == sc.goal);
    CHECK(res.records[i].guide == planner::guide_of(i, 26, 12));
    const double js = guidance::j_swept(x, sc, chain, 0.0, Expansion::none, 1, 1);
    CHECK(res.records[i].j_swept == js);
    bool folded = false;
    for (Eigen::Index k = 0; k + 1 < x.rows(); ++k)
      for (int sub = 0; sub < cfg.substeps; ++sub) {
        const double u = static_cast<double>(sub) / cfg.substeps;
        folded = folded || chain::self_collision(chain, JointState((1 - u) * x.row(k) + u * x.row(k + 1)).transpose());
      }
    folded = folded || chain::self_collision(chain, JointState(x.row(x.rows() - 1).transpose()));
    CHECK(res.records[i].self_collision == folded);
    if (std::pair(folded, js) < best) best = {folded, js}, best_i = i;
    CHECK(res.records[i].collision_free == eval::oracle_collision_free(x, sc, chain, cfg.substeps));
    any = any || res.records[i].collision_free;
  }
  CHECK(res.selected_index == best_i);
  CHECK(testing::bitwise_equal(res.selected, res.batch[best_i]));
  CHECK(res.success == res.records[best_i].collision_free);
  CHECK(res.success_any == any);
  bool flags = false;
  for (bool f : res.guide_success) flags = flags || f;
  CHECK(flags == any);
}

TEST_CASE("plan with all guide weights zero reproduces the unguided prior bitwise") {
  const auto chain = chain::default_chain();
  const auto net = small_net(10, 5);
  const auto sched = diffusion::make_schedule(6);
  const Scene sc = worldgen::gen_scene(worldgen::SceneKind::tabletop, chain, 2);
  auto guides = guidance::default_guides();
  for (auto& g : guides) g.weight = guidance::WeightSchedule::constant(0.0);
  planner::PlanConfig cfg;
  cfg.batch = 24;
  cfg.seed = 9;
  const auto res = planner::plan(net, sched, sc, chain, guides, cfg);
  diffusion::SampleConfig sc_cfg;
  sc_cfg.batch = 24;
  sc_cfg.seed = 9;
  sc_cfg.limits = &chain;
  const auto prior = diffusion::sample(net, sched, sc.start, sc.goal, sc_cfg);
  for (int i = 0; i < 24; ++i) CHECK(testing::bitwise_equal(res.batch[i], prior[i]));
}

TEST_CASE("sub-batches are independent of the guides that follow them") {
  const auto chain = chain::default_chain();
  const auto net = small_net(10, 6);
  const auto sched = diffusion::make_schedule(5);
  const Scene sc = worldgen::gen_scene(worldgen::SceneKind::cubby, chain, 4);
  const auto guides = guidance::default_guides();
  planner::PlanConfig cfg;
  cfg.batch = 36;
  cfg.seed = 1;
  const auto full = planner::plan(net, sched, sc, chain, guides, cfg);
  cfg.batch = 15;
  const auto prefix = planner::plan(net, sched, sc, chain, std::span(guides).first(5), cfg);
  for (int i = 0; i < 15; ++i) CHECK(testing::bitwise_equal(prefix.batch[i], full.batch[i]));
}

TEST_CASE("plan rejects inconsistent inputs") {
  const auto chain = chain::default_chain();
  const auto net = small_net(10, 2);
  const auto sched = diffusion::make_schedule(4);
  Scene sc = worldgen::gen_scene(worldgen::SceneKind::tabletop, chain, 1);
  const auto guides = guidance::default_guides();
  planner::PlanConfig cfg;
  cfg.batch = 11;
  CHECK_THROWS_AS(planner::plan(net, sched, sc, chain, guides, cfg), std::invalid_argument);
  cfg.batch = 12;
  CHECK_THROWS_AS(planner::plan(net, sched, sc, chain, {}, cfg), std::invalid_argument);
  sc.start = JointState::Zero(2);
  CHECK_THROWS_AS(planner::plan(net, sched, sc, chain, guides, cfg), std::invalid_argument);
}

TEST_CASE("multimodality: orthogonal pair beats identical pair, identical batch is maximal") {
  std::vector<Trajectory> ortho{column({1.0, 0.0}), column({0.0, 1.0})};
  std::vector<Trajectory> same{column({1.0, 0.0}), column({1.0, 0.0})};
  // Hand softmax: rows of C/0.1 are (10, 0) for the orthogonal pair.
  const double expect_ortho = 2.0 * std::log(1.0 + std::exp(-10.0));
  CHECK(multimodality::multimodality_cost(ortho).value == doctest::Approx(expect_ortho).epsilon(1e-12));
  CHECK(multimodality::multimodality_cost(same).value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  rng::Stream r(7, rng::Purpose::test);
  std::vector<Trajectory> ident(5, Trajectory::Constant(4, 2, 0.5));
  const double j_ident = multimodality::multimodality_cost(ident).value;
  for (int n = 0; n < 10; ++n) {
    auto perturbed = ident;
    for (auto& x : perturbed)
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += 0.3 * r.normal();
    CHECK(multimodality::multimodality_cost(perturbed).value < j_ident);
  }
}

TEST_CASE("multimodality gradient matches finite differences") {
  rng::Stream r(8, rng::Purpose::test);
  std::vector<Trajectory> batch;
  for (int i = 0; i < 4; ++i) {
    Trajectory x(3, 2);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = r.normal();
    batch.push_back(x);
  }
  const auto cost = multimodality::multimodality_cost(batch);
  for (int i = 0; i < 4; ++i) {
    auto f = [&](const Trajectory& xi) {
      auto b = batch;
      b[i] = xi;
      return multimodality::multimodality_cost(b).value;
    };
    CHECK((cost.gradient[i] - testing::fd_gradient(batch[i], f, 1e-5)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("literal contrastive loss is identically zero; zero-norm members have zero similarity") {
  rng::Stream r(9, rng::Purpose::test);
  for (int n = 0; n < 10; ++n) {
    std::vector<Trajectory> batch;
    for (int i = 0; i < 2 + n; ++i) {
      Trajectory x(5, 3);
      for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = r.normal();
      batch.push_back(x);
    }
    CHECK(multimodality::literal_contrastive_loss(batch) == 0.0);
    CHECK(multimodality::multimodality_cost(batch).value > 0.0);
  }
  std::vector<Trajectory> with_zero{column({1.0, 2.0}), column({0.0, 0.0})};
  const auto c = multimodality::cosine_similarity(with_zero);
  CHECK(c(0, 1) == 0.0);
  CHECK(c(1, 1) == 1.0);
  CHECK_THROWS_AS(multimodality::multimodality_cost(std::vector<Trajectory>{column({1.0})}), std::invalid_argument);
}
