#pragma once

#include <array>
#include <string>
#include <string_view>

#include "soskit/error.hpp"

namespace soskit {

/// Staff columns, in display order. The root column carries facing
/// direction; the other five carry limb/spine orientation.
enum class BodyPart : int { RT = 0, LA = 1, LL = 2, RL = 3, RA = 4, SP = 5 };

inline constexpr int kNumParts = 6;

inline constexpr std::array<BodyPart, kNumParts> kAllParts = {
    BodyPart::RT, BodyPart::LA, BodyPart::LL, BodyPart::RL, BodyPart::RA, BodyPart::SP};

inline constexpr std::array<std::string_view, kNumParts> kPartNames = {"RT", "LA", "LL",
                                                                        "RL", "RA", "SP"};

constexpr int index(BodyPart p) { return static_cast<int>(p); }

constexpr bool is_root(BodyPart p) { return p == BodyPart::RT; }

inline std::string part_name(BodyPart p) { return std::string(kPartNames[index(p)]); }

inline BodyPart part_from_name(std::string_view name) {
  for (int i = 0; i < kNumParts; ++i) {
    if (kPartNames[i] == name) return static_cast<BodyPart>(i);
  }
  throw ValidationError("unknown body part '" + std::string(name) +
                        "'; valid parts: RT, LA, LL, RL, RA, SP");
}

/// Named skeleton joints the feature extractor needs.
enum class Role : int {
  LeftShoulder = 0,
  RightShoulder,
  LeftWrist,
  RightWrist,
  LeftHip,
  RightHip,
  LeftAnkle,
  RightAnkle,
  Pelvis,
  Head,
};

inline constexpr int kNumRoles = 10;

inline constexpr std::array<std::string_view, kNumRoles> kRoleNames = {
    "left_shoulder", "right_shoulder", "left_wrist", "right_wrist", "left_hip",
    "right_hip",     "left_ankle",     "right_ankle", "pelvis",    "head"};

inline std::string role_name(Role r) { return std::string(kRoleNames[static_cast<int>(r)]); }

inline Role role_from_name(std::string_view name) {
  for (int i = 0; i < kNumRoles; ++i) {
    if (kRoleNames[i] == name) return static_cast<Role>(i);
  }
  std::string valid;
  for (auto n : kRoleNames) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw ValidationError("unknown role '" + std::string(name) + "'; valid roles: " + valid);
}

/// End/anchor roles for the five limb-like parts (RT has none).
struct LimbRoles {
  Role end;
  Role anchor;
};

constexpr LimbRoles limb_roles(BodyPart p) {
  switch (p) {
    case BodyPart::LA: return {Role::LeftWrist, Role::LeftShoulder};
    case BodyPart::RA: return {Role::RightWrist, Role::RightShoulder};
    case BodyPart::LL: return {Role::LeftAnkle, Role::LeftHip};
    case BodyPart::RL: return {Role::RightAnkle, Role::RightHip};
    case BodyPart::SP: return {Role::Head, Role::Pelvis};
    case BodyPart::RT: break;
  }
  return {Role::Pelvis, Role::Pelvis};
}

}  // namespace soskit
