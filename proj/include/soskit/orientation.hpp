#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "soskit/body_part.hpp"
#include "soskit/skeleton.hpp"

namespace soskit {

inline constexpr double kDegenerateNorm = 1e-6;

/// Per-frame egocentric basis; rows are [right, forward, up] in world
/// coordinates. held[t] marks frames that reused the previous basis.
struct ReferenceFrames {
  std::vector<Mat3> r;
  std::vector<bool> held;
};

/// o in T x 6 x 3, part order RT, LA, LL, RL, RA, SP.
struct OrientationFeatures {
  std::vector<std::array<Vec3, kNumParts>> o;
  std::vector<std::array<bool, kNumParts>> degenerate;

  int num_frames() const { return static_cast<int>(o.size()); }
};

/// Basis from hips and shoulders of one pose, or nullopt when the
/// horizontal across direction vanishes.
template <class S>
std::optional<Mat3T<S>> reference_frame_at(std::span<const Vec3T<S>> pos, const Skeleton& skel) {
  using std::sqrt;
  const Vec3T<S> hips = pos[skel.role(Role::RightHip)] - pos[skel.role(Role::LeftHip)];
  const Vec3T<S> shoulders = pos[skel.role(Role::RightShoulder)] - pos[skel.role(Role::LeftShoulder)];
  Vec3T<S> across = hips + shoulders;
  across.z() = S(0);
  const S n2 = across.squaredNorm();
  if (!(scalar_value(n2) >= kDegenerateNorm * kDegenerateNorm)) return std::nullopt;
  across /= sqrt(n2);
  const Vec3T<S> up(S(0), S(0), S(1));
  // up x across is horizontal and unit length because across is.
  const Vec3T<S> forward = up.cross(across);
  const Vec3T<S> right = forward.cross(up);
  Mat3T<S> r;
  r.row(0) = right.transpose();
  r.row(1) = forward.transpose();
  r.row(2) = up.transpose();
  return r;
}

/// Egocentric displacement of end from anchor: components along the
/// basis rows.
template <class S>
Vec3T<S> prpp_at(std::span<const Vec3T<S>> pos, const Mat3T<S>& frame, int end, int anchor) {
  return frame * (pos[end] - pos[anchor]);
}

/// Raw (unnormalized) six-part features for one pose.
template <class S>
std::array<Vec3T<S>, kNumParts> features_at(std::span<const Vec3T<S>> pos, const Mat3T<S>& frame,
                                            const Skeleton& skel) {
  std::array<Vec3T<S>, kNumParts> out;
  out[index(BodyPart::RT)] = frame.row(1).transpose();
  for (BodyPart p : kAllParts) {
    if (is_root(p)) continue;
    const LimbRoles lr = limb_roles(p);
    out[index(p)] = prpp_at<S>(pos, frame, skel.role(lr.end), skel.role(lr.anchor));
  }
  return out;
}

inline ReferenceFrames reference_frames(const JointTrajectories& traj, const Skeleton& skel) {
  ReferenceFrames out;
  const size_t n = traj.positions.size();
  out.r.reserve(n);
  out.held.reserve(n);
  Mat3 last = Mat3::Identity();  // forward (0,1,0) fallback for frame 0
  for (size_t t = 0; t < n; ++t) {
    auto f = reference_frame_at<double>(std::span<const Vec3>(traj.positions[t]), skel);
    if (f) last = *f;
    out.r.push_back(last);
    out.held.push_back(!f.has_value());
  }
  return out;
}

inline Eigen::MatrixXd prpp(const JointTrajectories& traj, const ReferenceFrames& frames, int end, int anchor) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(traj.positions.size()), 3);
  for (size_t t = 0; t < traj.positions.size(); ++t)
    out.row(static_cast<Eigen::Index>(t)) =
        prpp_at<double>(std::span<const Vec3>(traj.positions[t]), frames.r[t], end, anchor).transpose();
  return out;
}

inline OrientationFeatures features_from_trajectories(const JointTrajectories& traj, const Skeleton& skel) {
  const ReferenceFrames frames = reference_frames(traj, skel);
  OrientationFeatures out;
  out.o.reserve(traj.positions.size());
  out.degenerate.reserve(traj.positions.size());
  for (size_t t = 0; t < traj.positions.size(); ++t) {
    auto f = features_at<double>(std::span<const Vec3>(traj.positions[t]), frames.r[t], skel);
    std::array<bool, kNumParts> deg{};
    for (int p = 0; p < kNumParts; ++p) deg[p] = f[p].norm() < kDegenerateNorm;
    out.o.push_back(f);
    out.degenerate.push_back(deg);
  }
  return out;
}

inline OrientationFeatures extract_orientation_features(const Motion& m) {
  if (!m.skeleton.has_roles()) throw ValidationError("feature extraction needs all ten skeleton roles");
  return features_from_trajectories(forward_kinematics(m, /*zero_root_translation=*/true), m.skeleton);
}

/// Unit directions per frame and part. Degenerate rows hold the last
/// valid direction; leading degenerate rows take the first valid one,
/// or (0,1,0) when a part never has one.
inline std::vector<std::array<Vec3, kNumParts>> unit_directions(const OrientationFeatures& f) {
  const int n = f.num_frames();
  std::vector<std::array<Vec3, kNumParts>> out(n);
  for (int p = 0; p < kNumParts; ++p) {
    std::optional<Vec3> last;
    for (int t = 0; t < n; ++t) {
      if (!f.degenerate[t][p]) {
        last = f.o[t][p].normalized();
        break;
      }
    }
    if (!last) last = Vec3(0.0, 1.0, 0.0);
    for (int t = 0; t < n; ++t) {
      if (!f.degenerate[t][p]) last = f.o[t][p].normalized();
      out[t][p] = *last;
    }
  }
  return out;
}

}  // namespace soskit
