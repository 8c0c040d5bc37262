#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "soskit/skeleton.hpp"

namespace soskit::synthetic {

/// 17-joint z-up humanoid in a T-pose facing +y; left is -x.
inline Skeleton humanoid() {
  std::vector<Joint> j = {
      {"pelvis", -1, {0, 0, 1.0}},       {"spine", 0, {0, 0, 0.1}},         {"chest", 1, {0, 0, 0.25}},
      {"neck", 2, {0, 0, 0.2}},          {"head", 3, {0, 0, 0.1}},          {"l_shoulder", 2, {-0.18, 0, 0.15}},
      {"l_elbow", 5, {-0.28, 0, 0}},     {"l_wrist", 6, {-0.25, 0, 0}},     {"r_shoulder", 2, {0.18, 0, 0.15}},
      {"r_elbow", 8, {0.28, 0, 0}},      {"r_wrist", 9, {0.25, 0, 0}},      {"l_hip", 0, {-0.1, 0, -0.05}},
      {"l_knee", 11, {0, 0, -0.42}},     {"l_ankle", 12, {0, 0, -0.4}},     {"r_hip", 0, {0.1, 0, -0.05}},
      {"r_knee", 14, {0, 0, -0.42}},     {"r_ankle", 15, {0, 0, -0.4}},
  };
  return make_skeleton(std::move(j), {{"left_shoulder", "l_shoulder"},
                                      {"right_shoulder", "r_shoulder"},
                                      {"left_wrist", "l_wrist"},
                                      {"right_wrist", "r_wrist"},
                                      {"left_hip", "l_hip"},
                                      {"right_hip", "r_hip"},
                                      {"left_ankle", "l_ankle"},
                                      {"right_ankle", "r_ankle"},
                                      {"pelvis", "pelvis"},
                                      {"head", "head"}});
}

/// Smallest skeleton with every role on its own joint (10 joints).
inline Skeleton minimal() {
  std::vector<Joint> j = {
      {"pelvis", -1, {0, 0, 1.0}},      {"head", 0, {0, 0.05, 0.6}},   {"l_shoulder", 0, {-0.2, 0, 0.45}},
      {"l_wrist", 2, {-0.5, 0, 0}},     {"r_shoulder", 0, {0.2, 0, 0.45}}, {"r_wrist", 4, {0.5, 0, 0}},
      {"l_hip", 0, {-0.1, 0, -0.05}},   {"l_ankle", 6, {0, 0, -0.8}},  {"r_hip", 0, {0.1, 0, -0.05}},
      {"r_ankle", 8, {0, 0, -0.8}},
  };
  return make_skeleton(std::move(j), {{"left_shoulder", "l_shoulder"},
                                      {"right_shoulder", "r_shoulder"},
                                      {"left_wrist", "l_wrist"},
                                      {"right_wrist", "r_wrist"},
                                      {"left_hip", "l_hip"},
                                      {"right_hip", "r_hip"},
                                      {"left_ankle", "l_ankle"},
                                      {"right_ankle", "r_ankle"},
                                      {"pelvis", "pelvis"},
                                      {"head", "head"}});
}

inline Motion static_pose(const Skeleton& skel, int frames, double fps = 30.0) {
  Motion m;
  m.skeleton = skel;
  m.fps = fps;
  Pose p;
  p.rotations.assign(skel.joints.size(), Quat::Identity());
  m.frames.assign(static_cast<size_t>(frames), p);
  return m;
}

/// Left arm hangs down, swings forward and up to its peak at `peak_frame`
/// (about 135 degrees), then back down. Nothing else moves.
inline Motion arm_swing(int frames = 37, int peak_frame = 18, double fps = 30.0) {
  Motion m = static_pose(humanoid(), frames, fps);
  const int shoulder = *m.skeleton.find("l_shoulder");
  const double peak = 0.75 * std::numbers::pi;
  for (int t = 0; t < frames; ++t) {
    const double phase = t <= peak_frame ? static_cast<double>(t) / peak_frame
                                         : static_cast<double>(frames - 1 - t) / std::max(1, frames - 1 - peak_frame);
    const double angle = peak * phase;
    // Rest: arm rotated from -x to straight down; swing about world x.
    m.frames[t].rotations[shoulder] =
        Quat(Eigen::AngleAxisd(angle, Vec3::UnitX())) * Quat(Eigen::AngleAxisd(-std::numbers::pi / 2, Vec3::UnitY()));
  }
  return m;
}

/// Smooth seeded motion: sinusoidal rotations on limbs and spine plus a
/// slow heading change.
inline Motion random_smooth(std::uint64_t seed, const Skeleton& skel, int frames = 60, double fps = 30.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Motion m = static_pose(skel, frames, fps);
  struct Channel {
    int joint;
    Vec3 axis;
    double amplitude, omega, phase;
  };
  std::vector<Channel> channels;
  for (int j = 1; j < skel.num_joints(); ++j) {
    if (skel.joints[j].name.find("head") != std::string::npos) continue;
    Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    axis.normalize();
    channels.push_back({j, axis, 0.3 + 0.7 * unit(rng), 0.05 + 0.2 * unit(rng), 2 * std::numbers::pi * unit(rng)});
  }
  const double yaw_amp = 1.2 * (unit(rng) - 0.5);
  const double yaw_omega = 0.02 + 0.05 * unit(rng);
  for (int t = 0; t < frames; ++t) {
    Pose& p = m.frames[t];
    p.root_translation = Vec3(0.01 * t, 0.02 * t, 0.0);
    p.rotations[0] = quat_z(yaw_amp * std::sin(yaw_omega * t));
    for (const Channel& c : channels)
      p.rotations[c.joint] = quat_exp(c.axis * (c.amplitude * std::sin(c.omega * t + c.phase)));
  }
  return m;
}

/// Right-multiplies every joint rotation by exp(n), n ~ N(0, sigma^2 I).
inline Motion perturb(const Motion& m, double sigma, std::uint64_t seed, bool include_root = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Motion out = m;
  for (Pose& p : out.frames) {
    for (size_t j = include_root ? 0 : 1; j < p.rotations.size(); ++j) {
      const Vec3 n(gauss(rng), gauss(rng), gauss(rng));
      p.rotations[j] = (p.rotations[j] * quat_exp(n)).normalized();
    }
  }
  return out;
}

/// Rotates the whole motion about world up by yaw.
inline Motion yawed(const Motion& m, double yaw) {
  Motion out = m;
  const Quat q = quat_z(yaw);
  for (Pose& p : out.frames) {
    p.rotations[0] = (q * p.rotations[0]).normalized();
    p.root_translation = q * p.root_translation;
  }
  return out;
}

}  // namespace soskit::synthetic
