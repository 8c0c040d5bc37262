#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "soskit/error.hpp"
#include "soskit/skeleton.hpp"

namespace soskit {

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "." + key + ": required field missing");
  return *it;
}

inline double require_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path + ": expected a number");
  return v.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> require_vector(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array() || v.size() != N)
    throw ValidationError(path + ": expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = require_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

}  // namespace detail

/// Builds a Motion from the native JSON document. Throws ValidationError
/// whose message starts with the offending field path.
inline Motion motion_from_json(const nlohmann::json& doc) {
  using detail::require;
  Motion m;
  m.fps = detail::require_number(require(doc, "fps", "$"), "$.fps");

  const auto& skel = require(doc, "skeleton", "$");
  const auto& joints = require(skel, "joints", "$.skeleton");
  if (!joints.is_array()) throw ValidationError("$.skeleton.joints: expected an array");
  std::vector<Joint> js;
  std::vector<std::string> parent_names;
  for (size_t i = 0; i < joints.size(); ++i) {
    const std::string path = "$.skeleton.joints[" + std::to_string(i) + "]";
    Joint j;
    const auto& name = require(joints[i], "name", path);
    if (!name.is_string()) throw ValidationError(path + ".name: expected a string");
    j.name = name.get<std::string>();
    const auto& parent = require(joints[i], "parent", path);
    if (parent.is_null()) {
      parent_names.emplace_back();
    } else if (parent.is_string()) {
      parent_names.push_back(parent.get<std::string>());
    } else if (parent.is_number_integer()) {
      const int p = parent.get<int>();
      if (p < 0 || p >= static_cast<int>(i))
        throw ValidationError(path + ".parent: index must precede the joint");
      parent_names.push_back(joints[p].value("name", ""));
    } else {
      throw ValidationError(path + ".parent: expected null, a joint name or an index");
    }
    j.offset = detail::require_vector<3>(require(joints[i], "offset", path), path + ".offset");
    js.push_back(std::move(j));
  }
  for (size_t i = 0; i < js.size(); ++i) {
    if (parent_names[i].empty()) continue;
    int found = -1;
    for (size_t k = 0; k < i; ++k)
      if (js[k].name == parent_names[i]) found = static_cast<int>(k);
    if (found < 0)
      throw ValidationError("$.skeleton.joints[" + std::to_string(i) + "].parent: '" + parent_names[i] +
                            "' is not an earlier joint");
    js[i].parent = found;
  }

  const auto& roles = require(skel, "roles", "$.skeleton");
  if (!roles.is_object()) throw ValidationError("$.skeleton.roles: expected an object");
  std::map<std::string, std::string> role_map;
  for (const auto& [role, joint] : roles.items()) {
    if (!joint.is_string()) throw ValidationError("$.skeleton.roles." + role + ": expected a joint name");
    role_map[role] = joint.get<std::string>();
  }
  try {
    m.skeleton = make_skeleton(std::move(js), role_map);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("$.skeleton: ") + e.what());
  }

  const auto& frames = require(doc, "frames", "$");
  if (!frames.is_array()) throw ValidationError("$.frames: expected an array");
  m.frames.reserve(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    const std::string path = "$.frames[" + std::to_string(t) + "]";
    Pose p;
    p.root_translation = detail::require_vector<3>(require(frames[t], "root_t", path), path + ".root_t");
    const auto& rot = require(frames[t], "rot", path);
    if (!rot.is_array()) throw ValidationError(path + ".rot: expected an array");
    for (size_t j = 0; j < rot.size(); ++j) {
      const auto q = detail::require_vector<4>(rot[j], path + ".rot[" + std::to_string(j) + "]");
      p.rotations.emplace_back(q[0], q[1], q[2], q[3]);  // w, x, y, z
    }
    m.frames.push_back(std::move(p));
  }
  validate(m);
  return m;
}

inline Motion parse_motion_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return motion_from_json(doc);
}

inline nlohmann::ordered_json motion_to_json(const Motion& m) {
  nlohmann::ordered_json doc;
  doc["fps"] = m.fps;
  nlohmann::ordered_json joints = nlohmann::ordered_json::array();
  for (const Joint& j : m.skeleton.joints) {
    nlohmann::ordered_json jj;
    jj["name"] = j.name;
    jj["parent"] = j.parent < 0 ? nlohmann::ordered_json(nullptr)
                                : nlohmann::ordered_json(m.skeleton.joints[j.parent].name);
    jj["offset"] = {j.offset.x(), j.offset.y(), j.offset.z()};
    joints.push_back(std::move(jj));
  }
  nlohmann::ordered_json roles = nlohmann::ordered_json::object();
  for (int r = 0; r < kNumRoles; ++r)
    roles[std::string(kRoleNames[r])] = m.skeleton.joints[m.skeleton.roles[r]].name;
  doc["skeleton"] = {{"joints", std::move(joints)}, {"roles", std::move(roles)}};
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (const Pose& p : m.frames) {
    nlohmann::ordered_json rot = nlohmann::ordered_json::array();
    for (const Quat& q : p.rotations) rot.push_back({q.w(), q.x(), q.y(), q.z()});
    frames.push_back({{"root_t", {p.root_translation.x(), p.root_translation.y(), p.root_translation.z()}},
                      {"rot", std::move(rot)}});
  }
  doc["frames"] = std::move(frames);
  return doc;
}

inline std::string serialize_motion_json(const Motion& m) { return motion_to_json(m).dump(); }

}  // namespace soskit
