#include "edmp/chain.hpp"

#include "edmp/log.hpp"
#include "io_util.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace edmp {

namespace log {
namespace {
Sink& sink_ref() {
  static Sink sink;
  return sink;
}
}  // namespace

Sink set_warning_sink(Sink sink) {
  Sink prev = std::move(sink_ref());
  sink_ref() = std::move(sink);
  return prev;
}

void warn(std::string_view message) {
  if (sink_ref()) {
    sink_ref()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}
}  // namespace log

namespace chain {

using json_util::json;

int ChainSpec::body_joint(int body) const {
  if (body < static_cast<int>(links.size())) return links[body].joint;
  return links.back().joint;
}

JointState ChainSpec::lower() const {
  JointState v(dof());
  for (int j = 0; j < dof(); ++j) v[j] = joints[j].lo;
  return v;
}

JointState ChainSpec::upper() const {
  JointState v(dof());
  for (int j = 0; j < dof(); ++j) v[j] = joints[j].hi;
  return v;
}

bool ChainSpec::within_limits(const JointState& q, double tol) const {
  if (q.size() != dof()) return false;
  for (int j = 0; j < dof(); ++j)
    if (!(q[j] >= joints[j].lo - tol && q[j] <= joints[j].hi + tol)) return false;
  return true;
}

void ChainSpec::validate() const {
  if (joints.empty()) throw std::invalid_argument("joints: at least one joint required");
  if (links.empty()) throw std::invalid_argument("links: at least one link required");
  for (std::size_t j = 0; j < joints.size(); ++j) {
    std::string path = "joints[" + std::to_string(j) + "]";
    if (std::abs(joints[j].axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument(path + ".axis: not unit norm");
    if (!(joints[j].lo < joints[j].hi)) throw std::invalid_argument(path + ".limits: lo must be < hi");
    if (!geom::is_rotation(joints[j].origin.rotation))
      throw std::invalid_argument(path + ".origin: not a rotation");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::string path = "links[" + std::to_string(i) + "]";
    if (links[i].joint < 0 || links[i].joint >= dof())
      throw std::invalid_argument(path + ".joint: out of range");
    if (!(links[i].half_extents.array() > 0.0).all())
      throw std::invalid_argument(path + ".half_extents: must be positive");
  }
  if (attached && !(attached->half_extents.array() > 0.0).all())
    throw std::invalid_argument("attached.half_extents: must be positive");
}

ChainSpec default_chain() {
  constexpr double pi = std::numbers::pi;
  ChainSpec c;
  c.name = "desk3";
  const Vec3 half(0.35, 0.05, 0.05);
  // Column about z, then shoulder and elbow pitch about y.
  c.joints.push_back({Vec3::UnitZ(), Pose::identity(), -pi, pi});
  c.joints.push_back({Vec3::UnitY(), Pose::from_xyz({0.0, 0.0, 0.7}), -pi, pi});
  c.joints.push_back({Vec3::UnitY(), Pose::from_xyz({0.7, 0.0, 0.0}), -pi, pi});
  c.links.push_back({0, Pose::from_xyz_rpy({0.0, 0.0, 0.35}, {0.0, -pi / 2, 0.0}), half});
  c.links.push_back({1, Pose::from_xyz({0.35, 0.0, 0.0}), half});
  c.links.push_back({2, Pose::from_xyz({0.35, 0.0, 0.0}), half});
  return c;
}

KinematicState kinematics(const ChainSpec& chain, const JointState& q) {
  if (q.size() != chain.dof())
    throw std::invalid_argument("joint state has " + std::to_string(q.size()) + " entries, chain has " +
                                std::to_string(chain.dof()) + " joints");
  KinematicState ks;
  ks.joint_frames.reserve(chain.joints.size());
  ks.joint_axes.reserve(chain.joints.size());
  Pose frame;
  for (int j = 0; j < chain.dof(); ++j) {
    const Joint& jt = chain.joints[j];
    frame = frame * jt.origin * Pose::from_axis_angle(jt.axis, q[j]);
    ks.joint_frames.push_back(frame);
    ks.joint_axes.push_back(frame.rotation * jt.axis);
  }
  ks.bodies.reserve(chain.num_bodies());
  for (const Link& l : chain.links) ks.bodies.push_back({ks.joint_frames[l.joint] * l.offset, l.half_extents});
  if (chain.attached) {
    ks.bodies.push_back({ks.bodies[chain.links.size() - 1].pose * chain.attached->offset,
                         chain.attached->half_extents});
  }
  ks.vertices.reserve(ks.bodies.size());
  for (const Cuboid& b : ks.bodies) ks.vertices.push_back(geom::vertices(b));
  return ks;
}

std::vector<Cuboid> fk(const ChainSpec& chain, const JointState& q) {
  return kinematics(chain, q).bodies;
}

void accumulate_point_gradient(const ChainSpec& chain, const KinematicState& ks, int body,
                               const Vec3& p, const Vec3& d_point, Eigen::Ref<Eigen::VectorXd> dq) {
  int last = chain.body_joint(body);
  for (int j = 0; j <= last; ++j)
    dq[j] += d_point.dot(ks.joint_axes[j].cross(p - ks.joint_frames[j].translation));
}

FkGradient fk_grad(const ChainSpec& chain, const JointState& q) {
  KinematicState ks = kinematics(chain, q);
  FkGradient g;
  g.vertices = ks.vertices;
  g.jacobian = Eigen::MatrixXd::Zero(chain.num_bodies() * 24, chain.dof());
  for (int b = 0; b < chain.num_bodies(); ++b) {
    int last = chain.body_joint(b);
    for (int v = 0; v < 8; ++v) {
      const Vec3& p = ks.vertices[b][v];
      for (int j = 0; j <= last; ++j)
        g.jacobian.block<3, 1>((b * 8 + v) * 3, j) =
            ks.joint_axes[j].cross(p - ks.joint_frames[j].translation);
    }
  }
  return g;
}

JointState clip_joints(const JointState& q, const ChainSpec& chain) {
  return q.cwiseMax(chain.lower()).cwiseMin(chain.upper());
}

void clip_trajectory(Trajectory& tau, const ChainSpec& chain) {
  for (Eigen::Index k = 0; k < tau.rows(); ++k)
    for (int j = 0; j < chain.dof(); ++j)
      tau(k, j) = std::clamp(tau(k, j), chain.joints[j].lo, chain.joints[j].hi);
}

bool bodies_adjacent(const ChainSpec& chain, int a, int b) {
  return std::abs(chain.body_joint(a) - chain.body_joint(b)) <= 1;
}

bool self_collision(const ChainSpec& chain, const KinematicState& ks) {
  const int n = static_cast<int>(ks.bodies.size());
  std::vector<geom::Extents> ext;
  ext.reserve(n);
  for (const auto& v : ks.vertices) ext.push_back(geom::extents(v));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!bodies_adjacent(chain, a, b) && geom::overlap_volume(ext[a], ext[b]) > 0.0) return true;
  return false;
}

bool self_collision(const ChainSpec& chain, const JointState& q) {
  return self_collision(chain, kinematics(chain, q));
}

ChainSpec attach_object(const ChainSpec& chain, const Vec3& half_extents, const Pose& offset) {
  if (!(half_extents.array() > 0.0).all())
    throw std::invalid_argument("attached.half_extents: must be positive");
  ChainSpec out = chain;
  if (out.attached) log::warn("chain '" + chain.name + "' already carries an object; replacing it");
  out.attached = Attachment{offset, half_extents};
  return out;
}

namespace {

Attachment parse_attachment(const json& j, const std::string& path) {
  json_util::expect_object(j, path, {"offset", "half_extents"});
  Attachment a;
  a.half_extents = json_util::vec3(json_util::field(j, path, "half_extents"), path + ".half_extents");
  if (j.contains("offset")) a.offset = json_util::pose(j["offset"], path + ".offset");
  if (!(a.half_extents.array() > 0.0).all()) json_util::fail(path + ".half_extents", "must be positive");
  return a;
}

}  // namespace

ChainSpec parse_chain(const std::string& json_text) {
  json j = json_util::parse(json_text, "chain");
  const std::string root = "chain";
  json_util::expect_object(j, root, {"format", "name", "joints", "links", "attached"});
  if (j.contains("format") && j["format"] != "edmp-chain-v1")
    json_util::fail(root + ".format", "unsupported format tag");
  ChainSpec c;
  c.name = j.value("name", std::string("chain"));
  const json& joints = json_util::field(j, root, "joints");
  if (!joints.is_array()) json_util::fail(root + ".joints", "expected an array");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    std::string path = root + ".joints[" + std::to_string(i) + "]";
    const json& jj = joints[i];
    json_util::expect_object(jj, path, {"axis", "origin", "limits"});
    Joint jt;
    jt.axis = json_util::vec3(json_util::field(jj, path, "axis"), path + ".axis");
    if (std::abs(jt.axis.norm() - 1.0) > 1e-9) json_util::fail(path + ".axis", "not unit norm");
    if (jj.contains("origin")) jt.origin = json_util::pose(jj["origin"], path + ".origin");
    auto lim = json_util::numbers(json_util::field(jj, path, "limits"), path + ".limits", 2);
    if (!(lim[0] < lim[1])) json_util::fail(path + ".limits", "lo must be < hi");
    jt.lo = lim[0];
    jt.hi = lim[1];
    c.joints.push_back(jt);
  }
  const json& links = json_util::field(j, root, "links");
  if (!links.is_array()) json_util::fail(root + ".links", "expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::string path = root + ".links[" + std::to_string(i) + "]";
    const json& lj = links[i];
    json_util::expect_object(lj, path, {"joint", "offset", "half_extents"});
    Link l;
    const json& ji = json_util::field(lj, path, "joint");
    if (!ji.is_number_integer()) json_util::fail(path + ".joint", "expected an integer");
    l.joint = ji.get<int>();
    if (l.joint < 0 || l.joint >= static_cast<int>(c.joints.size()))
      json_util::fail(path + ".joint", "out of range");
    if (lj.contains("offset")) l.offset = json_util::pose(lj["offset"], path + ".offset");
    l.half_extents = json_util::vec3(json_util::field(lj, path, "half_extents"), path + ".half_extents");
    if (!(l.half_extents.array() > 0.0).all()) json_util::fail(path + ".half_extents", "must be positive");
    c.links.push_back(l);
  }
  if (j.contains("attached") && !j["attached"].is_null())
    c.attached = parse_attachment(j["attached"], root + ".attached");
  c.validate();
  return c;
}

ChainSpec read_chain(const std::filesystem::path& path) {
  return parse_chain(io_util::read_text(path));
}

std::string chain_to_json(const ChainSpec& c) {
  json j;
  j["format"] = "edmp-chain-v1";
  j["name"] = c.name;
  j["joints"] = json::array();
  for (const Joint& jt : c.joints)
    j["joints"].push_back({{"axis", json_util::to_json(jt.axis)},
                           {"origin", json_util::to_json(jt.origin)},
                           {"limits", json::array({jt.lo, jt.hi})}});
  j["links"] = json::array();
  for (const Link& l : c.links)
    j["links"].push_back({{"joint", l.joint},
                          {"offset", json_util::to_json(l.offset)},
                          {"half_extents", json_util::to_json(l.half_extents)}});
  if (c.attached)
    j["attached"] = {{"offset", json_util::to_json(c.attached->offset)},
                     {"half_extents", json_util::to_json(c.attached->half_extents)}};
  return j.dump(2) + "\n";
}

void write_chain(const ChainSpec& chain, const std::filesystem::path& path) {
  io_util::write_text(path, chain_to_json(chain));
}

Attachment read_attachment(const std::filesystem::path& path) {
  return parse_attachment(json_util::parse(io_util::read_text(path), "attachment"), "attachment");
}

}  // namespace chain
}  // namespace edmp
