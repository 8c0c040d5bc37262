#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soskit/body_part.hpp"
#include "soskit/error.hpp"
#include "soskit/rotation.hpp"

namespace soskit {

struct Joint {
  std::string name;
  int parent = -1;  // -1 for the root
  Vec3 offset = Vec3::Zero();

  bool operator==(const Joint&) const = default;
};

struct Skeleton {
  std::vector<Joint> joints;
  std::array<int, kNumRoles> roles = unassigned_roles();  // role -> joint index

  static constexpr std::array<int, kNumRoles> unassigned_roles() {
    std::array<int, kNumRoles> r{};
    r.fill(-1);
    return r;
  }

  int num_joints() const { return static_cast<int>(joints.size()); }
  int role(Role r) const { return roles[static_cast<int>(r)]; }

  /// False for kinematic-only skeletons (FK and rotations work, feature
  /// extraction does not).
  bool has_roles() const {
    for (int r : roles)
      if (r < 0) return false;
    return true;
  }

  std::optional<int> find(std::string_view name) const {
    for (int i = 0; i < num_joints(); ++i) {
      if (joints[i].name == name) return i;
    }
    return std::nullopt;
  }

  bool operator==(const Skeleton&) const = default;
};

inline void validate(const Skeleton& skel, bool require_roles = true) {
  if (skel.joints.empty()) throw ValidationError("skeleton has no joints");
  int roots = 0;
  for (int i = 0; i < skel.num_joints(); ++i) {
    const Joint& j = skel.joints[i];
    if (j.parent < 0) {
      ++roots;
      if (i != 0) throw ValidationError("root joint '" + j.name + "' must be joint 0");
    } else if (j.parent >= i) {
      throw ValidationError("joint '" + j.name + "' has parent index " + std::to_string(j.parent) +
                            " not preceding it");
    }
    if (!j.offset.allFinite()) throw ValidationError("joint '" + j.name + "' has non-finite offset");
  }
  if (roots != 1) throw ValidationError("skeleton must have exactly one root joint");
  if (!require_roles && !skel.has_roles()) return;
  std::vector<bool> used(skel.joints.size(), false);
  for (int r = 0; r < kNumRoles; ++r) {
    const int idx = skel.roles[r];
    if (idx < 0 || idx >= skel.num_joints())
      throw ValidationError("role '" + std::string(kRoleNames[r]) + "' does not name a joint");
    if (used[idx])
      throw ValidationError("role '" + std::string(kRoleNames[r]) + "' shares joint '" +
                            skel.joints[idx].name + "' with another role");
    used[idx] = true;
  }
}

/// Resolves role -> joint name pairs and validates the result.
inline Skeleton make_skeleton(std::vector<Joint> joints,
                              const std::map<std::string, std::string>& role_joint_names) {
  Skeleton skel;
  skel.joints = std::move(joints);
  skel.roles.fill(-1);
  for (const auto& [role, joint] : role_joint_names) {
    const Role r = role_from_name(role);
    auto idx = skel.find(joint);
    if (!idx) throw ValidationError("role '" + role + "' names unknown joint '" + joint + "'");
    skel.roles[static_cast<int>(r)] = *idx;
  }
  for (int r = 0; r < kNumRoles; ++r) {
    if (skel.roles[r] < 0) throw ValidationError("missing role '" + std::string(kRoleNames[r]) + "'");
  }
  validate(skel);
  return skel;
}

struct Pose {
  Vec3 root_translation = Vec3::Zero();
  std::vector<Quat> rotations;  // local, one per joint
};

struct Motion {
  Skeleton skeleton;
  double fps = 30.0;
  std::vector<Pose> frames;

  int num_frames() const { return static_cast<int>(frames.size()); }
  int num_joints() const { return skeleton.num_joints(); }
};

inline void validate(const Motion& m, bool require_roles = true) {
  validate(m.skeleton, require_roles);
  if (!(m.fps > 0.0) || !std::isfinite(m.fps)) throw ValidationError("fps must be positive");
  if (m.num_frames() < 2) throw ValidationError("motion needs at least 2 frames");
  for (int t = 0; t < m.num_frames(); ++t) {
    const Pose& p = m.frames[t];
    if (static_cast<int>(p.rotations.size()) != m.num_joints())
      throw ValidationError("frame " + std::to_string(t) + " has " +
                            std::to_string(p.rotations.size()) + " rotations, skeleton has " +
                            std::to_string(m.num_joints()) + " joints");
    if (!p.root_translation.allFinite())
      throw ValidationError("frame " + std::to_string(t) + " has non-finite root translation");
    for (int j = 0; j < m.num_joints(); ++j) {
      const double n = p.rotations[j].norm();
      if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6)
        throw ValidationError("frame " + std::to_string(t) + " joint '" + m.skeleton.joints[j].name +
                              "': quaternion norm " + std::to_string(n) + " is not 1");
    }
  }
}

/// Equal skeletons, frame counts, and per-value agreement within tol.
inline bool approx_equal(const Motion& a, const Motion& b, double tol) {
  if (a.num_frames() != b.num_frames() || !(a.skeleton.roles == b.skeleton.roles)) return false;
  if (a.num_joints() != b.num_joints()) return false;
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol * std::max(1.0, std::abs(y)); };
  if (!close(a.fps, b.fps)) return false;
  for (int j = 0; j < a.num_joints(); ++j) {
    const Joint& ja = a.skeleton.joints[j];
    const Joint& jb = b.skeleton.joints[j];
    if (ja.name != jb.name || ja.parent != jb.parent) return false;
    for (int k = 0; k < 3; ++k)
      if (!close(ja.offset[k], jb.offset[k])) return false;
  }
  for (int t = 0; t < a.num_frames(); ++t) {
    for (int k = 0; k < 3; ++k)
      if (!close(a.frames[t].root_translation[k], b.frames[t].root_translation[k])) return false;
    for (int j = 0; j < a.num_joints(); ++j)
      for (int k = 0; k < 4; ++k)
        if (!close(a.frames[t].rotations[j].coeffs()[k], b.frames[t].rotations[j].coeffs()[k]))
          return false;
  }
  return true;
}

/// World joint positions, T x J.
struct JointTrajectories {
  std::vector<std::vector<Vec3>> positions;
  bool local = false;  // root translation zeroed
};

/// World positions of every joint for one pose given local rotation matrices.
template <class S>
std::vector<Vec3T<S>> fk_pose(const Skeleton& skel, std::span<const Mat3T<S>> local,
                              const Vec3T<S>& root_translation) {
  const int n = skel.num_joints();
  std::vector<Mat3T<S>> world_rot(n);
  std::vector<Vec3T<S>> pos(n);
  for (int j = 0; j < n; ++j) {
    const Joint& joint = skel.joints[j];
    const Vec3T<S> offset = joint.offset.template cast<S>();
    if (joint.parent < 0) {
      world_rot[j] = local[j];
      pos[j] = root_translation + offset;
    } else {
      world_rot[j] = world_rot[joint.parent] * local[j];
      pos[j] = pos[joint.parent] + world_rot[joint.parent] * offset;
    }
  }
  return pos;
}

inline std::vector<Vec3> fk_pose(const Skeleton& skel, const Pose& pose, bool zero_root_translation) {
  std::vector<Mat3> local(pose.rotations.size());
  for (size_t j = 0; j < local.size(); ++j) local[j] = pose.rotations[j].normalized().toRotationMatrix();
  const Vec3 root = zero_root_translation ? Vec3::Zero() : pose.root_translation;
  return fk_pose<double>(skel, std::span<const Mat3>(local), root);
}

inline JointTrajectories forward_kinematics(const Motion& m, bool zero_root_translation) {
  JointTrajectories out;
  out.local = zero_root_translation;
  out.positions.reserve(m.frames.size());
  for (const Pose& p : m.frames) out.positions.push_back(fk_pose(m.skeleton, p, zero_root_translation));
  return out;
}

/// T x J 6D rotations of the local joint rotations.
inline std::vector<std::vector<std::array<double, 6>>> to_rot6d(const Motion& m) {
  std::vector<std::vector<std::array<double, 6>>> out(m.frames.size());
  for (size_t t = 0; t < m.frames.size(); ++t) {
    out[t].reserve(m.frames[t].rotations.size());
    for (const Quat& q : m.frames[t].rotations) out[t].push_back(rot6d(q));
  }
  return out;
}

}  // namespace soskit
