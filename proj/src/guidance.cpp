#include "edmp/guidance.hpp"

#include "io_util.hpp"
#include "json_util.hpp"

#include <cmath>
#include <stdexcept>

namespace edmp::guidance {

using geom::Expansion;
using geom::Extents;
using geom::Vec3;
using json_util::json;

double ClearanceSchedule::at(int t, int total_steps) const {
  if (!linear) return from;
  return to + (from - to) * static_cast<double>(t) / static_cast<double>(total_steps);
}

double WeightSchedule::at(int t, int total_steps) const {
  return base + slope * static_cast<double>(t) / static_cast<double>(total_steps);
}

void GuideConfig::validate() const {
  if (clearance.from < 0.0 || clearance.to < 0.0) throw std::invalid_argument("guide: clearance must be >= 0");
  if (weight.base < 0.0 || weight.base + weight.slope < 0.0)
    throw std::invalid_argument("guide: weight must stay >= 0 over the schedule");
}

std::vector<GuideConfig> default_guides() {
  const auto affine = WeightSchedule{1.4, 1.0};
  const auto c = ClearanceSchedule::constant;
  const auto w = WeightSchedule::constant;
  return {
      {CostKind::intersection, c(0.1), Expansion::none, false, affine},
      {CostKind::intersection, c(0.05), Expansion::none, false, affine},
      {CostKind::intersection, c(0.01), Expansion::none, false, affine},
      {CostKind::intersection, c(0.15), Expansion::none, false, affine},
      {CostKind::intersection, ClearanceSchedule::linear_decay(0.15, 0.01), Expansion::none, false, affine},
      {CostKind::swept, c(0.06), Expansion::type1, false, affine},
      {CostKind::swept, c(0.0), Expansion::type2, true, w(0.05)},
      {CostKind::swept, c(0.0), Expansion::type2, true, w(0.01)},
      {CostKind::swept, c(0.02), Expansion::type2, true, w(0.1)},
      {CostKind::swept, c(0.1), Expansion::type2, true, w(0.1)},
      {CostKind::swept, c(0.05), Expansion::type3, true, w(0.05)},
      {CostKind::swept, c(0.05), Expansion::type3, true, w(0.1)},
  };
}

// ---------------------------------------------------------------------------
// guide files

namespace {

const char* expansion_name(Expansion e) {
  switch (e) {
    case Expansion::none: return "none";
    case Expansion::type1: return "type1";
    case Expansion::type2: return "type2";
    case Expansion::type3: return "type3";
  }
  return "none";
}

Expansion parse_expansion(const json& j, const std::string& path) {
  if (!j.is_string()) json_util::fail(path, "expected a string");
  const std::string s = j.get<std::string>();
  if (s == "none") return Expansion::none;
  if (s == "type1") return Expansion::type1;
  if (s == "type2") return Expansion::type2;
  if (s == "type3") return Expansion::type3;
  json_util::fail(path, "unknown expansion '" + s + "'");
}

GuideConfig parse_guide(const json& j, const std::string& path) {
  json_util::expect_object(j, path, {"cost", "clearance", "expansion", "normalize", "weight"});
  GuideConfig g;
  const json& cost = json_util::field(j, path, "cost");
  if (cost == "intersection") {
    g.cost = CostKind::intersection;
  } else if (cost == "swept") {
    g.cost = CostKind::swept;
  } else {
    json_util::fail(path + ".cost", "expected 'intersection' or 'swept'");
  }

  const json& cl = json_util::field(j, path, "clearance");
  json_util::expect_object(cl, path + ".clearance", {"constant", "linear"});
  if (cl.contains("constant") == cl.contains("linear"))
    json_util::fail(path + ".clearance", "give exactly one of constant or linear");
  if (cl.contains("constant")) {
    g.clearance = ClearanceSchedule::constant(json_util::number(cl["constant"], path + ".clearance.constant"));
  } else {
    const json& lin = cl["linear"];
    const std::string lp = path + ".clearance.linear";
    json_util::expect_object(lin, lp, {"from", "to"});
    g.clearance = ClearanceSchedule::linear_decay(json_util::number(json_util::field(lin, lp, "from"), lp + ".from"),
                                                  json_util::number(json_util::field(lin, lp, "to"), lp + ".to"));
  }

  g.expansion = j.contains("expansion") ? parse_expansion(j["expansion"], path + ".expansion") : Expansion::none;
  if (j.contains("normalize")) {
    if (!j["normalize"].is_boolean()) json_util::fail(path + ".normalize", "expected a boolean");
    g.normalize = j["normalize"].get<bool>();
  }

  const json& w = json_util::field(j, path, "weight");
  json_util::expect_object(w, path + ".weight", {"constant", "affine"});
  if (w.contains("constant") == w.contains("affine"))
    json_util::fail(path + ".weight", "give exactly one of constant or affine");
  if (w.contains("constant")) {
    g.weight = WeightSchedule::constant(json_util::number(w["constant"], path + ".weight.constant"));
  } else {
    const json& a = w["affine"];
    const std::string ap = path + ".weight.affine";
    json_util::expect_object(a, ap, {"base", "slope"});
    g.weight = {json_util::number(json_util::field(a, ap, "base"), ap + ".base"),
                json_util::number(json_util::field(a, ap, "slope"), ap + ".slope")};
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    json_util::fail(path, e.what());
  }
  return g;
}

}  // namespace

std::string guides_to_json(std::span<const GuideConfig> guides) {
  json arr = json::array();
  for (const GuideConfig& g : guides) {
    json j;
    j["cost"] = g.cost == CostKind::intersection ? "intersection" : "swept";
    if (g.clearance.linear) {
      j["clearance"] = {{"linear", {{"from", g.clearance.from}, {"to", g.clearance.to}}}};
    } else {
      j["clearance"] = {{"constant", g.clearance.from}};
    }
    j["expansion"] = expansion_name(g.expansion);
    j["normalize"] = g.normalize;
    if (g.weight.slope == 0.0) {
      j["weight"] = {{"constant", g.weight.base}};
    } else {
      j["weight"] = {{"affine", {{"base", g.weight.base}, {"slope", g.weight.slope}}}};
    }
    arr.push_back(j);
  }
  json root;
  root["format"] = "edmp-guides-v1";
  root["guides"] = arr;
  return root.dump(2) + "\n";
}

std::vector<GuideConfig> parse_guides(const std::string& json_text) {
  json root = json_util::parse(json_text, "guides");
  json_util::expect_object(root, "guides", {"format", "guides"});
  if (root.contains("format") && root["format"] != "edmp-guides-v1")
    json_util::fail("guides.format", "unsupported format tag");
  const json& arr = json_util::field(root, "guides", "guides");
  if (!arr.is_array() || arr.empty()) json_util::fail("guides.guides", "expected a non-empty array");
  std::vector<GuideConfig> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_guide(arr[i], "guides[" + std::to_string(i) + "]"));
  return out;
}

std::vector<GuideConfig> read_guides(const std::filesystem::path& path) {
  return parse_guides(io_util::read_text(path));
}

void write_guides(std::span<const GuideConfig> guides, const std::filesystem::path& path) {
  io_util::write_text(path, guides_to_json(guides));
}

// ---------------------------------------------------------------------------
// costs

std::vector<Extents> obstacle_extents(const Scene& scene, double clearance, Expansion expansion, int t,
                                      int total_steps) {
  std::vector<Extents> out;
  out.reserve(scene.obstacles.size());
  for (const Obstacle& o : scene.obstacles)
    out.push_back(geom::extents(geom::inflate(o.box(), clearance, expansion, t, total_steps)));
  return out;
}

namespace {

struct WaypointBodies {
  chain::KinematicState ks;
  std::vector<geom::SupportedExtents> ext;
};

WaypointBodies waypoint_bodies(const chain::ChainSpec& chain, const Trajectory& tau, Eigen::Index k) {
  WaypointBodies w;
  w.ks = chain::kinematics(chain, tau.row(k).transpose());
  w.ext.reserve(w.ks.vertices.size());
  for (const auto& v : w.ks.vertices) w.ext.push_back(geom::supported_extents(v));
  return w;
}

// Pushes per-axis bound derivatives onto the supporting vertices of `body` and
// then through the joint Jacobian into row `k` of grad.
void push_bound_gradient(const chain::ChainSpec& chain, const WaypointBodies& w, int body, const Vec3& d_lo,
                         const Vec3& d_hi, Trajectory& grad, Eigen::Index k) {
  std::array<Vec3, 8> dv;
  for (auto& v : dv) v.setZero();
  const auto& se = w.ext[body];
  for (int d = 0; d < 3; ++d) {
    dv[se.lo_vertex[d]][d] += d_lo[d];
    dv[se.hi_vertex[d]][d] += d_hi[d];
  }
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(chain.dof());
  for (int v = 0; v < 8; ++v)
    if (!dv[v].isZero(0.0)) chain::accumulate_point_gradient(chain, w.ks, body, w.ks.vertices[body][v], dv[v], dq);
  grad.row(k) += dq.transpose();
}

}  // namespace

double j_inter(const Trajectory& tau, const chain::ChainSpec& chain, std::span<const Extents> obstacles) {
  double cost = 0.0;
  if (obstacles.empty()) return cost;
  for (Eigen::Index k = 0; k < tau.rows(); ++k) {
    chain::KinematicState ks = chain::kinematics(chain, tau.row(k).transpose());
    for (const auto& v : ks.vertices) {
      Extents e = geom::extents(v);
      for (const Extents& o : obstacles) cost += geom::overlap_volume(e, o);
    }
  }
  return cost;
}

double j_swept(const Trajectory& tau, const chain::ChainSpec& chain, std::span<const Extents> obstacles) {
  double cost = 0.0;
  if (obstacles.empty() || tau.rows() < 2) return cost;
  std::vector<Extents> prev;
  for (Eigen::Index k = 0; k < tau.rows(); ++k) {
    chain::KinematicState ks = chain::kinematics(chain, tau.row(k).transpose());
    std::vector<Extents> cur;
    cur.reserve(ks.vertices.size());
    for (const auto& v : ks.vertices) cur.push_back(geom::extents(v));
    if (k > 0)
      for (std::size_t b = 0; b < cur.size(); ++b) {
        Extents sw = geom::swept_extents(prev[b], cur[b]);
        for (const Extents& o : obstacles) cost += geom::overlap_volume(sw, o);
      }
    prev = std::move(cur);
  }
  return cost;
}

double j_inter(const Trajectory& tau, const Scene& scene, const chain::ChainSpec& chain, double clearance,
               Expansion expansion, int t, int total_steps) {
  auto obs = obstacle_extents(scene, clearance, expansion, t, total_steps);
  return j_inter(tau, chain, obs);
}

double j_swept(const Trajectory& tau, const Scene& scene, const chain::ChainSpec& chain, double clearance,
               Expansion expansion, int t, int total_steps) {
  auto obs = obstacle_extents(scene, clearance, expansion, t, total_steps);
  return j_swept(tau, chain, obs);
}

CostGradient j_inter_gradient(const Trajectory& tau, const chain::ChainSpec& chain,
                              std::span<const Extents> obstacles) {
  CostGradient out{0.0, Trajectory::Zero(tau.rows(), tau.cols())};
  if (obstacles.empty()) return out;
  for (Eigen::Index k = 0; k < tau.rows(); ++k) {
    WaypointBodies w = waypoint_bodies(chain, tau, k);
    for (int b = 0; b < static_cast<int>(w.ext.size()); ++b) {
      Vec3 d_lo = Vec3::Zero(), d_hi = Vec3::Zero();
      bool touched = false;
      for (const Extents& o : obstacles) {
        geom::OverlapGradient g = geom::overlap_volume_gradient(w.ext[b].box, o);
        if (g.volume == 0.0) continue;
        out.cost += g.volume;
        d_lo += g.d_a_lo;
        d_hi += g.d_a_hi;
        touched = true;
      }
      if (touched) push_bound_gradient(chain, w, b, d_lo, d_hi, out.gradient, k);
    }
  }
  return out;
}

CostGradient j_swept_gradient(const Trajectory& tau, const chain::ChainSpec& chain,
                              std::span<const Extents> obstacles) {
  CostGradient out{0.0, Trajectory::Zero(tau.rows(), tau.cols())};
  if (obstacles.empty() || tau.rows() < 2) return out;
  std::vector<WaypointBodies> ws;
  ws.reserve(tau.rows());
  for (Eigen::Index k = 0; k < tau.rows(); ++k) ws.push_back(waypoint_bodies(chain, tau, k));
  const int bodies = static_cast<int>(ws[0].ext.size());
  for (Eigen::Index k = 0; k + 1 < tau.rows(); ++k) {
    const WaypointBodies& a = ws[k];
    const WaypointBodies& b = ws[k + 1];
    for (int body = 0; body < bodies; ++body) {
      const Extents& ea = a.ext[body].box;
      const Extents& eb = b.ext[body].box;
      Extents sw = geom::swept_extents(ea, eb);
      Vec3 d_lo = Vec3::Zero(), d_hi = Vec3::Zero();
      bool touched = false;
      for (const Extents& o : obstacles) {
        geom::OverlapGradient g = geom::overlap_volume_gradient(sw, o);
        if (g.volume == 0.0) continue;
        out.cost += g.volume;
        d_lo += g.d_a_lo;
        d_hi += g.d_a_hi;
        touched = true;
      }
      if (!touched) continue;
      // Route each swept bound to the waypoint that attains it (ties -> k).
      Vec3 a_lo = Vec3::Zero(), a_hi = Vec3::Zero(), b_lo = Vec3::Zero(), b_hi = Vec3::Zero();
      for (int d = 0; d < 3; ++d) {
        (ea.lo[d] <= eb.lo[d] ? a_lo : b_lo)[d] = d_lo[d];
        (ea.hi[d] >= eb.hi[d] ? a_hi : b_hi)[d] = d_hi[d];
      }
      push_bound_gradient(chain, a, body, a_lo, a_hi, out.gradient, k);
      push_bound_gradient(chain, b, body, b_lo, b_hi, out.gradient, k + 1);
    }
  }
  return out;
}

Trajectory guide_gradient(const GuideConfig& cfg, const Trajectory& tau, const Scene& scene,
                          const chain::ChainSpec& chain, int t, int total_steps) {
  const double weight = cfg.weight.at(t, total_steps);
  if (weight == 0.0 || scene.obstacles.empty()) return Trajectory::Zero(tau.rows(), tau.cols());
  auto obs = obstacle_extents(scene, cfg.clearance.at(t, total_steps), cfg.expansion, t, total_steps);
  Trajectory g = cfg.cost == CostKind::intersection ? j_inter_gradient(tau, chain, obs).gradient
                                                    : j_swept_gradient(tau, chain, obs).gradient;
  g.row(0).setZero();
  g.row(g.rows() - 1).setZero();
  if (cfg.normalize) {
    const double n = g.norm();
    if (n > 0.0) g /= n;
  }
  return weight * g;
}

}  // namespace edmp::guidance
