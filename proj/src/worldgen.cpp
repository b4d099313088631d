#include "edmp/worldgen.hpp"

#include "edmp/eval.hpp"
#include "edmp/kernels.hpp"
#include "edmp/rng.hpp"
#include "io_util.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace edmp::worldgen {

using geom::Vec3;
using json_util::json;

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::tabletop: return "tabletop";
    case SceneKind::shelf: return "shelf";
    case SceneKind::cubby: return "cubby";
    case SceneKind::sphere_field: return "sphere_field";
  }
  return "tabletop";
}

SceneKind parse_kind(const std::string& name) {
  for (SceneKind k : kAllKinds)
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown scene kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// config

void WorldgenConfig::validate() const {
  if (version != 1) throw std::invalid_argument("worldgen config: unsupported version");
  if ((workspace_hi - workspace_lo).minCoeff() <= 0.0) throw std::invalid_argument("worldgen config: empty workspace");
  if (min_obstacles < 1 || max_obstacles < min_obstacles)
    throw std::invalid_argument("worldgen config: bad obstacle count range");
  if (shelf_thickness_lo <= 0.0 || shelf_thickness_hi < shelf_thickness_lo)
    throw std::invalid_argument("worldgen config: bad shelf thickness range");
  if (attempts < 1) throw std::invalid_argument("worldgen config: attempts must be >= 1");
  if (h < 2) throw std::invalid_argument("worldgen config: h must be >= 2");
  if (max_via < 0 || via_sigma < 0.0) throw std::invalid_argument("worldgen config: bad via-point settings");
}

std::string config_to_json(const WorldgenConfig& c) {
  json j;
  j["format"] = "edmp-worldgen-v1";
  j["version"] = c.version;
  j["workspace_lo"] = json_util::to_json(c.workspace_lo);
  j["workspace_hi"] = json_util::to_json(c.workspace_hi);
  j["min_obstacles"] = c.min_obstacles;
  j["max_obstacles"] = c.max_obstacles;
  j["shelf_thickness"] = {c.shelf_thickness_lo, c.shelf_thickness_hi};
  j["keepout_lo"] = json_util::to_json(c.keepout_lo);
  j["keepout_hi"] = json_util::to_json(c.keepout_hi);
  j["min_start_goal_distance"] = c.min_start_goal_distance;
  j["attempts"] = c.attempts;
  j["h"] = c.h;
  j["max_via"] = c.max_via;
  j["via_sigma"] = c.via_sigma;
  return j.dump(2) + "\n";
}

WorldgenConfig parse_config(const std::string& text) {
  const std::string p = "worldgen";
  json j = json_util::parse(text, p);
  json_util::expect_object(j, p,
                           {"format", "version", "workspace_lo", "workspace_hi", "min_obstacles", "max_obstacles",
                            "shelf_thickness", "keepout_lo", "keepout_hi", "min_start_goal_distance", "attempts",
                            "h", "max_via", "via_sigma"});
  if (j.contains("format") && j["format"] != "edmp-worldgen-v1") json_util::fail(p + ".format", "unsupported format tag");
  WorldgenConfig c;
  auto integer = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) json_util::fail(p + "." + key, "expected an integer");
    out = j[key].get<int>();
  };
  auto real = [&](const char* key, double& out) {
    if (j.contains(key)) out = json_util::number(j[key], p + "." + key);
  };
  auto vec = [&](const char* key, Vec3& out) {
    if (j.contains(key)) out = json_util::vec3(j[key], p + "." + key);
  };
  integer("version", c.version);
  vec("workspace_lo", c.workspace_lo);
  vec("workspace_hi", c.workspace_hi);
  integer("min_obstacles", c.min_obstacles);
  integer("max_obstacles", c.max_obstacles);
  if (j.contains("shelf_thickness")) {
    auto v = json_util::numbers(j["shelf_thickness"], p + ".shelf_thickness", 2);
    c.shelf_thickness_lo = v[0];
    c.shelf_thickness_hi = v[1];
  }
  vec("keepout_lo", c.keepout_lo);
  vec("keepout_hi", c.keepout_hi);
  real("min_start_goal_distance", c.min_start_goal_distance);
  integer("attempts", c.attempts);
  integer("h", c.h);
  integer("max_via", c.max_via);
  real("via_sigma", c.via_sigma);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    json_util::fail(p, e.what());
  }
  return c;
}

WorldgenConfig read_config(const std::filesystem::path& path) { return parse_config(io_util::read_text(path)); }

// ---------------------------------------------------------------------------
// scenes

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPlacementTries = 200;

struct Builder {
  const WorldgenConfig& cfg;
  rng::Stream& rng;
  std::vector<Obstacle> obstacles;

  bool fits(const Obstacle& o) const {
    const geom::Extents e = geom::extents(o.box());
    if (geom::overlap_volume(e, {cfg.keepout_lo, cfg.keepout_hi}) > 0.0) return false;
    return (e.lo.array() >= cfg.workspace_lo.array() - 1e-12).all() &&
           (e.hi.array() <= cfg.workspace_hi.array() + 1e-12).all();
  }

  // A rigid group in a yawed frame at `origin`; local boxes are (center, half).
  std::vector<Obstacle> group(const Vec3& origin, double yaw,
                              const std::vector<std::pair<Vec3, Vec3>>& local) const {
    const geom::Pose frame = geom::Pose::from_xyz_rpy(origin, {0.0, 0.0, yaw});
    std::vector<Obstacle> out;
    for (const auto& [c, half] : local) out.push_back({frame.apply(c), half, {0.0, 0.0, yaw}});
    return out;
  }

  bool add_all(const std::vector<Obstacle>& os) {
    for (const Obstacle& o : os)
      if (!fits(o)) return false;
    obstacles.insert(obstacles.end(), os.begin(), os.end());
    return true;
  }

  Vec3 polar(double r, double theta, double z) const { return {r * std::cos(theta), r * std::sin(theta), z}; }

  void floor_box() {
    for (int i = 0; i < kPlacementTries; ++i) {
      Vec3 half{rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.35)};
      Obstacle o{polar(rng.uniform(0.35, 1.0), rng.uniform(-kPi, kPi), half.z()), half,
                 {0.0, 0.0, rng.uniform(-kPi, kPi)}};
      if (add_all({o})) return;
    }
  }

  double thickness() { return rng.uniform(cfg.shelf_thickness_lo, cfg.shelf_thickness_hi); }

  void shelf() {
    const int levels = std::max(1, std::min(rng.uniform_int(3, 5), cfg.max_obstacles));
    for (int i = 0; i < kPlacementTries; ++i) {
      const double theta = rng.uniform(-kPi, kPi);
      const double dist = rng.uniform(0.7, 0.95);
      const double depth = rng.uniform(0.12, 0.2);
      const double width = rng.uniform(0.3, 0.45);
      const double z0 = rng.uniform(0.15, 0.4);
      const double gap = rng.uniform(0.3, 0.4);
      const double t = thickness();
      std::vector<std::pair<Vec3, Vec3>> local;
      for (int k = 0; k < levels; ++k) local.push_back({{0.0, 0.0, z0 + k * gap}, {depth, width, t / 2}});
      const double top = z0 + (levels - 1) * gap;
      const int sides = std::min(2, cfg.max_obstacles - levels);
      for (int s = 0; s < sides; ++s) {
        const double y = (s == 0 ? -1.0 : 1.0) * (width + t / 2);
        local.push_back({{0.0, y, top / 2}, {depth, t / 2, top / 2}});
      }
      if (add_all(group(polar(dist, theta, 0.0), theta, local))) return;
    }
  }

  void cubby() {
    for (int i = 0; i < kPlacementTries; ++i) {
      const double theta = rng.uniform(-kPi, kPi);
      const double dist = rng.uniform(0.75, 0.95);
      const double depth = rng.uniform(0.12, 0.2);
      const double width = rng.uniform(0.2, 0.3);
      const double height = rng.uniform(0.15, 0.25);
      const double zc = rng.uniform(0.4, 1.0);
      const double t = thickness();
      const double ht = t / 2;
      std::vector<std::pair<Vec3, Vec3>> local = {
          {{0.0, 0.0, zc - height - ht}, {depth, width + t, ht}},        // bottom
          {{0.0, 0.0, zc + height + ht}, {depth, width + t, ht}},        // top
          {{0.0, -width - ht, zc}, {depth, ht, height}},                 // side
          {{0.0, width + ht, zc}, {depth, ht, height}},                  // side
          {{depth + ht, 0.0, zc}, {ht, width + t, height + t}},          // back
      };
      if (add_all(group(polar(dist, theta, 0.0), theta, local))) break;
    }
    const int extra = rng.uniform_int(0, std::max(0, cfg.max_obstacles - 5));
    for (int k = 0; k < extra; ++k) floor_box();
  }

  void sphere_field(int n) {
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < kPlacementTries; ++i) {
        const double r = rng.uniform(0.05, 0.15);
        Vec3 c;
        for (int d = 0; d < 3; ++d) c[d] = rng.uniform(cfg.workspace_lo[d] + r, cfg.workspace_hi[d] - r);
        c.z() = rng.uniform(std::max(cfg.workspace_lo.z() + r, 0.1), std::min(cfg.workspace_hi.z() - r, 1.6));
        if (add_all({{c, Vec3::Constant(r), Vec3::Zero()}})) break;
      }
  }
};

JointState uniform_joints(const chain::ChainSpec& chain, rng::Stream& rng) {
  JointState q(chain.dof());
  for (int j = 0; j < chain.dof(); ++j) q[j] = rng.uniform(chain.joints[j].lo, chain.joints[j].hi);
  return q;
}

}  // namespace

namespace {

Scene gen_scene_where(SceneKind kind, const chain::ChainSpec& chain, std::uint64_t seed, const WorldgenConfig& cfg,
                      const std::function<bool(const Scene&)>& accept) {
  cfg.validate();
  rng::Stream rng(seed, rng::Purpose::scene, static_cast<std::uint64_t>(kind));
  Builder b{cfg, rng, {}};
  const int n = rng.uniform_int(cfg.min_obstacles, cfg.max_obstacles);
  switch (kind) {
    case SceneKind::tabletop:
      for (int k = 0; k < n; ++k) b.floor_box();
      break;
    case SceneKind::shelf: b.shelf(); break;
    case SceneKind::cubby: b.cubby(); break;
    case SceneKind::sphere_field: b.sphere_field(n); break;
  }

  Scene scene;
  scene.name = to_string(kind) + "-" + std::to_string(seed);
  scene.kind = to_string(kind);
  scene.obstacles = std::move(b.obstacles);
  for (int a = 0; a < cfg.attempts; ++a) {
    rng::Stream qs(seed, rng::Purpose::scene, 100 + static_cast<std::uint64_t>(kind), a);
    JointState s = uniform_joints(chain, qs);
    JointState g = uniform_joints(chain, qs);
    if ((g - s).norm() < cfg.min_start_goal_distance) continue;
    if (!eval::waypoint_collision_free(s, scene, chain) || !eval::waypoint_collision_free(g, scene, chain)) continue;
    // Endpoints the bare chain can join without folding through itself.
    Scene bare;
    bare.start = s;
    bare.goal = g;
    if (!eval::oracle_collision_free(straight_line(s, g, cfg.h), bare, chain)) continue;
    scene.start = std::move(s);
    scene.goal = std::move(g);
    if (accept && !accept(scene)) continue;
    return scene;
  }
  throw std::runtime_error("worldgen: no valid start/goal for " + to_string(kind) + " seed " + std::to_string(seed) +
                           " after " + std::to_string(cfg.attempts) + " attempts");
}

}  // namespace

Scene gen_scene(SceneKind kind, const chain::ChainSpec& chain, std::uint64_t seed, const WorldgenConfig& cfg) {
  return gen_scene_where(kind, chain, seed, cfg, {});
}

Trajectory straight_line(const JointState& start, const JointState& goal, int h) {
  if (h < 2) throw std::invalid_argument("straight_line: h must be >= 2");
  Trajectory tau(h, start.size());
  for (int k = 0; k < h; ++k) {
    const double u = static_cast<double>(k) / (h - 1);
    tau.row(k) = ((1.0 - u) * start + u * goal).transpose();
  }
  tau.row(h - 1) = goal.transpose();
  return tau;
}

Scene gen_straight_line_scene(SceneKind kind, const chain::ChainSpec& chain, std::uint64_t seed,
                              const WorldgenConfig& cfg, int substeps) {
  return gen_scene_where(kind, chain, seed, cfg, [&](const Scene& sc) {
    return eval::oracle_collision_free(straight_line(sc.start, sc.goal, cfg.h), sc, chain, substeps);
  });
}

// ---------------------------------------------------------------------------
// prior trajectories

double quintic(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

Trajectory quintic_through(std::span<const JointState> points, int h) {
  if (points.size() < 2 || h < 2) throw std::invalid_argument("quintic_through: need two points and h >= 2");
  const int m = static_cast<int>(points[0].size());
  const std::size_t segs = points.size() - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (std::size_t i = 0; i < segs; ++i) cum[i + 1] = cum[i] + (points[i + 1] - points[i]).norm();
  const double total = cum[segs];

  Trajectory tau(h, m);
  for (int k = 0; k < h; ++k) {
    if (total == 0.0) {
      tau.row(k) = points[0].transpose();
      continue;
    }
    const double s = total * k / (h - 1);
    std::size_t i = 0;
    while (i + 1 < segs && cum[i + 1] <= s) ++i;
    const double len = cum[i + 1] - cum[i];
    const double u = len > 0.0 ? std::clamp((s - cum[i]) / len, 0.0, 1.0) : 1.0;
    tau.row(k) = (points[i] + quintic(u) * (points[i + 1] - points[i])).transpose();
  }
  tau.row(0) = points.front().transpose();
  tau.row(h - 1) = points.back().transpose();
  return tau;
}

Trajectory gen_prior_trajectory(const chain::ChainSpec& chain, std::uint64_t seed, const WorldgenConfig& cfg) {
  cfg.validate();
  const JointState lo = chain.lower();
  const JointState hi = chain.upper();
  for (int a = 0; a < cfg.attempts; ++a) {
    rng::Stream rng(seed, rng::Purpose::trajectory, a);
    std::vector<JointState> points;
    points.push_back(uniform_joints(chain, rng));
    JointState goal = uniform_joints(chain, rng);
    const int nvia = rng.uniform_int(0, cfg.max_via);
    std::vector<double> us(nvia);
    for (double& u : us) u = rng.uniform(0.0, 1.0);
    std::sort(us.begin(), us.end());
    for (double u : us) {
      JointState v = points[0] + u * (goal - points[0]);
      for (int j = 0; j < chain.dof(); ++j) v[j] += cfg.via_sigma * rng.normal();
      points.push_back(v.cwiseMax(lo).cwiseMin(hi));
    }
    points.push_back(std::move(goal));

    Trajectory tau = quintic_through(points, cfg.h);
    bool ok = true;
    for (int k = 0; ok && k < cfg.h; ++k) {
      const JointState q = tau.row(k).transpose();
      ok = chain.within_limits(q) && !chain::self_collision(chain, q);
    }
    if (ok) return tau;
  }
  throw std::runtime_error("worldgen: no valid prior trajectory for seed " + std::to_string(seed));
}

namespace {

// float rounding that never leaves [lo, hi]
Trajectory to_float_within(const Trajectory& tau, const chain::ChainSpec& chain) {
  Trajectory out = data::round_to_float(tau);
  for (Eigen::Index k = 0; k < out.rows(); ++k)
    for (int j = 0; j < chain.dof(); ++j) {
      float f = static_cast<float>(out(k, j));
      while (f > chain.joints[j].hi) f = std::nextafter(f, 0.0f);
      while (f < chain.joints[j].lo) f = std::nextafter(f, 0.0f);
      out(k, j) = f;
    }
  return out;
}

}  // namespace

data::Dataset gen_dataset(const chain::ChainSpec& chain, int count, std::uint64_t seed, const WorldgenConfig& cfg,
                          bool parallel) {
  if (count < 1) throw std::invalid_argument("gen_dataset: count must be >= 1");
  cfg.validate();
  data::Dataset ds;
  ds.meta = {chain.dof(), cfg.h, count, seed, chain.name};
  ds.trajectories.resize(count);
  kernels::for_each_index(count, parallel ? kernels::Exec::parallel : kernels::Exec::serial, [&](int i) {
    try {
      ds.trajectories[i] =
          to_float_within(gen_prior_trajectory(chain, rng::derive(seed, rng::Purpose::dataset, i), cfg), chain);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("gen_dataset: trajectory " + std::to_string(i) + ": " + e.what());
    }
  });
  return ds;
}

// ---------------------------------------------------------------------------
// scene files

std::string scene_to_json(const Scene& scene) {
  json j;
  j["format"] = "edmp-scene-v1";
  j["name"] = scene.name;
  j["kind"] = scene.kind;
  json obs = json::array();
  for (const Obstacle& o : scene.obstacles)
    obs.push_back({{"center", json_util::to_json(o.center)},
                   {"half_extents", json_util::to_json(o.half_extents)},
                   {"rpy", json_util::to_json(o.rpy)}});
  j["obstacles"] = obs;
  j["start"] = std::vector<double>(scene.start.data(), scene.start.data() + scene.start.size());
  j["goal"] = std::vector<double>(scene.goal.data(), scene.goal.data() + scene.goal.size());
  return j.dump(2) + "\n";
}

namespace {

JointState joint_field(const json& j, const std::string& path, const chain::ChainSpec* chain) {
  auto v = json_util::numbers(j, path, chain ? chain->dof() : -1);
  JointState q = Eigen::Map<const JointState>(v.data(), static_cast<Eigen::Index>(v.size()));
  if (chain)
    for (int i = 0; i < chain->dof(); ++i)
      if (q[i] < chain->joints[i].lo || q[i] > chain->joints[i].hi)
        json_util::fail(path + "[" + std::to_string(i) + "]",
                        "joint " + std::to_string(i) + " value " + std::to_string(q[i]) + " outside limits [" +
                            std::to_string(chain->joints[i].lo) + ", " + std::to_string(chain->joints[i].hi) + "]");
  return q;
}

}  // namespace

Scene parse_scene(const std::string& text, const chain::ChainSpec* chain) {
  const std::string p = "scene";
  json j = json_util::parse(text, p);
  json_util::expect_object(j, p, {"format", "name", "kind", "obstacles", "start", "goal"});
  if (json_util::field(j, p, "format") != "edmp-scene-v1") json_util::fail(p + ".format", "unsupported format tag");
  Scene s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) json_util::fail(p + ".name", "expected a string");
    s.name = j["name"].get<std::string>();
  }
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) json_util::fail(p + ".kind", "expected a string");
    s.kind = j["kind"].get<std::string>();
  }
  const json& obs = json_util::field(j, p, "obstacles");
  if (!obs.is_array()) json_util::fail(p + ".obstacles", "expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string op = p + ".obstacles[" + std::to_string(i) + "]";
    json_util::expect_object(obs[i], op, {"center", "half_extents", "rpy", "rotation"});
    Obstacle o;
    o.center = json_util::vec3(json_util::field(obs[i], op, "center"), op + ".center");
    o.half_extents = json_util::vec3(json_util::field(obs[i], op, "half_extents"), op + ".half_extents");
    for (int d = 0; d < 3; ++d)
      if (!(o.half_extents[d] > 0.0))
        json_util::fail(op + ".half_extents[" + std::to_string(d) + "]", "must be positive");
    if (obs[i].contains("rpy") && obs[i].contains("rotation")) json_util::fail(op, "give either rpy or rotation");
    if (obs[i].contains("rpy")) o.rpy = json_util::vec3(obs[i]["rpy"], op + ".rpy");
    if (obs[i].contains("rotation")) {
      json pj = {{"rotation", obs[i]["rotation"]}};
      o.rpy = json_util::pose(pj, op).rpy();
    }
    s.obstacles.push_back(o);
  }
  s.start = joint_field(json_util::field(j, p, "start"), p + ".start", chain);
  s.goal = joint_field(json_util::field(j, p, "goal"), p + ".goal", chain);
  if (s.start.size() != s.goal.size()) json_util::fail(p + ".goal", "start and goal differ in length");
  return s;
}

Scene read_scene(const std::filesystem::path& path, const chain::ChainSpec* chain) {
  return parse_scene(io_util::read_text(path), chain);
}

void write_scene(const Scene& scene, const std::filesystem::path& path) {
  io_util::write_text(path, scene_to_json(scene));
}

}  // namespace edmp::worldgen
