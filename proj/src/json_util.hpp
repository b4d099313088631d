#pragma once

// Strict JSON field access: every reader names the full field path on error
// and objects reject keys they do not know.

#include "edmp/geom.hpp"

#include <json.hpp>

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace edmp::json_util {

using nlohmann::json;

class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw FormatError(path + ": " + what);
}

inline void expect_object(const json& j, const std::string& path,
                          std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) fail(path + "." + it.key(), "unknown field");
  }
}

inline const json& field(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite number");
  return v;
}

inline std::vector<double> numbers(const json& j, const std::string& path, int expected = -1) {
  if (!j.is_array()) fail(path, "expected an array");
  if (expected >= 0 && static_cast<int>(j.size()) != expected)
    fail(path, "expected " + std::to_string(expected) + " values, got " + std::to_string(j.size()));
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline geom::Vec3 vec3(const json& j, const std::string& path) {
  auto v = numbers(j, path, 3);
  return {v[0], v[1], v[2]};
}

inline json to_json(const geom::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline geom::Pose pose(const json& j, const std::string& path) {
  expect_object(j, path, {"xyz", "rpy", "rotation"});
  geom::Vec3 xyz = j.contains("xyz") ? vec3(j["xyz"], path + ".xyz") : geom::Vec3::Zero();
  if (j.contains("rpy") && j.contains("rotation")) fail(path, "give either rpy or rotation, not both");
  if (j.contains("rotation")) {
    const json& r = j["rotation"];
    if (!r.is_array() || r.size() != 3) fail(path + ".rotation", "expected a 3x3 matrix");
    geom::Mat3 m;
    for (int i = 0; i < 3; ++i) {
      auto row = numbers(r[i], path + ".rotation[" + std::to_string(i) + "]", 3);
      for (int k = 0; k < 3; ++k) m(i, k) = row[k];
    }
    if (!geom::is_rotation(m)) fail(path + ".rotation", "not an orthonormal rotation");
    return {m, xyz};
  }
  geom::Vec3 rpy = j.contains("rpy") ? vec3(j["rpy"], path + ".rpy") : geom::Vec3::Zero();
  return geom::Pose::from_xyz_rpy(xyz, rpy);
}

inline json to_json(const geom::Pose& p) {
  json j;
  j["xyz"] = to_json(p.translation);
  geom::Vec3 rpy = p.rpy();
  if (geom::Pose::from_xyz_rpy(p.translation, rpy).rotation == p.rotation) {
    j["rpy"] = to_json(rpy);
  } else {
    json r = json::array();
    for (int i = 0; i < 3; ++i) r.push_back(json::array({p.rotation(i, 0), p.rotation(i, 1), p.rotation(i, 2)}));
    j["rotation"] = r;
  }
  return j;
}

inline json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

}  // namespace edmp::json_util
