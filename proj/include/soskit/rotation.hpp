#pragma once

#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <unsupported/Eigen/AutoDiff>

namespace soskit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

template <class S>
using Vec3T = Eigen::Matrix<S, 3, 1>;
template <class S>
using Mat3T = Eigen::Matrix<S, 3, 3>;

// World convention: x = right, y = forward, z = up.
inline const Vec3 kWorldUp{0.0, 0.0, 1.0};

inline double scalar_value(double x) { return x; }

template <class D>
double scalar_value(const Eigen::AutoDiffScalar<D>& x) {
  return x.value();
}

template <class S>
Mat3T<S> skew(const Vec3T<S>& w) {
  Mat3T<S> m;
  m << S(0), -w.z(), w.y(),  //
      w.z(), S(0), -w.x(),   //
      -w.y(), w.x(), S(0);
  return m;
}

/// Rotation matrix of an exponential-map (axis * angle) vector.
template <class S>
Mat3T<S> exp_map_matrix(const Vec3T<S>& w) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const S theta2 = w.squaredNorm();
  const Mat3T<S> k = skew<S>(w);
  Mat3T<S> r = Mat3T<S>::Identity();
  if (scalar_value(theta2) < 1e-16) {
    // Second-order series; keeps the derivative finite at w = 0.
    r += k + S(0.5) * (k * k);
    return r;
  }
  const S theta = sqrt(theta2);
  r += (sin(theta) / theta) * k + ((S(1) - cos(theta)) / theta2) * (k * k);
  return r;
}

template <class S>
Mat3T<S> rot_z(const S& angle) {
  using std::cos;
  using std::sin;
  const S c = cos(angle);
  const S s = sin(angle);
  Mat3T<S> m;
  m << c, -s, S(0),  //
      s, c, S(0),    //
      S(0), S(0), S(1);
  return m;
}

inline Quat quat_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

/// Axis-angle vector with angle in [0, pi].
inline Vec3 quat_log(Quat q) {
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-300) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

/// Angle of the twist of q about world up.
inline double yaw_of(const Quat& q) { return 2.0 * std::atan2(q.z(), q.w()); }

inline Quat quat_z(double angle) { return Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())); }

/// First two columns of the rotation matrix, concatenated.
inline std::array<double, 6> rot6d(const Mat3& r) {
  return {r(0, 0), r(1, 0), r(2, 0), r(0, 1), r(1, 1), r(2, 1)};
}

inline std::array<double, 6> rot6d(const Quat& q) { return rot6d(Mat3(q.normalized())); }

/// Gram-Schmidt completion of a 6D rotation back to a matrix.
inline Mat3 rot6d_to_matrix(const std::array<double, 6>& v) {
  const Vec3 a{v[0], v[1], v[2]};
  const Vec3 b{v[3], v[4], v[5]};
  const Vec3 c0 = a.normalized();
  const Vec3 c1 = (b - c0.dot(b) * c0).normalized();
  Mat3 r;
  r.col(0) = c0;
  r.col(1) = c1;
  r.col(2) = c0.cross(c1);
  return r;
}

}  // namespace soskit
