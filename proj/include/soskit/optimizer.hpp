#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include "soskit/body_part.hpp"
#include "soskit/orientation.hpp"
#include "soskit/periodic.hpp"
#include "soskit/quantizer.hpp"
#include "soskit/skeleton.hpp"
#include "soskit/sos_script.hpp"

namespace soskit {

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Metrics

/// Fraction of script entries whose argmax symbol in m matches; 1.0 for
/// an empty script.
inline double sos_accuracy(const Motion& m, const SOSScript& script) {
  if (script.num_frames != m.num_frames())
    throw ValidationError("script has " + std::to_string(script.num_frames) + " frames, motion has " +
                          std::to_string(m.num_frames()));
  if (script.entries.empty()) return 1.0;
  const auto symbols = hard_quantize(extract_orientation_features(m));
  int hits = 0;
  for (const SOSEntry& e : script.entries) {
    if (e.frame < 0 || e.frame >= m.num_frames()) throw ValidationError("script entry frame outside the motion");
    if (symbols[e.frame][index(e.part)] == e.symbol) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(script.entries.size());
}

/// Mean over frames and joints of the L2 distance between 6D rotations.
inline double l2_rot6d(const Motion& x, const Motion& ref) {
  if (x.num_frames() != ref.num_frames() || x.num_joints() != ref.num_joints())
    throw ValidationError("l2_rot6d needs motions with equal frame and joint counts");
  double total = 0.0;
  for (int t = 0; t < x.num_frames(); ++t) {
    for (int j = 0; j < x.num_joints(); ++j) {
      const auto a = rot6d(x.frames[t].rotations[j]);
      const auto b = rot6d(ref.frames[t].rotations[j]);
      double d2 = 0.0;
      for (int k = 0; k < 6; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
      total += std::sqrt(d2);
    }
  }
  return total / (static_cast<double>(x.num_frames()) * x.num_joints());
}

// ---------------------------------------------------------------------------
// Direct parameterization: per frame [root yaw, root rotvec, joint rotvecs...]

inline int direct_stride(int num_joints) { return 1 + 3 * num_joints; }

inline Eigen::MatrixXd encode_direct(const Motion& m) {
  const int d = direct_stride(m.num_joints());
  Eigen::MatrixXd theta(m.num_frames(), d);
  double prev_yaw = 0.0;
  for (int t = 0; t < m.num_frames(); ++t) {
    const Pose& p = m.frames[t];
    double yaw = yaw_of(p.rotations[0]);
    if (t > 0) yaw += 2.0 * std::numbers::pi * std::round((prev_yaw - yaw) / (2.0 * std::numbers::pi));
    prev_yaw = yaw;
    theta(t, 0) = yaw;
    theta.block<1, 3>(t, 1) = quat_log(quat_z(-yaw) * p.rotations[0]).transpose();
    for (int j = 1; j < m.num_joints(); ++j) theta.block<1, 3>(t, 1 + 3 * j) = quat_log(p.rotations[j]).transpose();
  }
  return theta;
}

/// Motion with rotations from theta and everything else from base.
inline Motion decode_direct(const Eigen::MatrixXd& theta, const Motion& base) {
  Motion m = base;
  for (int t = 0; t < m.num_frames(); ++t) {
    Pose& p = m.frames[t];
    p.rotations[0] = (quat_z(theta(t, 0)) * quat_exp(theta.block<1, 3>(t, 1).transpose())).normalized();
    for (int j = 1; j < m.num_joints(); ++j)
      p.rotations[j] = quat_exp(theta.block<1, 3>(t, 1 + 3 * j).transpose()).normalized();
  }
  return m;
}

template <class S>
std::vector<Mat3T<S>> local_rotations(const Eigen::Matrix<S, Eigen::Dynamic, 1>& row, int num_joints) {
  std::vector<Mat3T<S>> local(num_joints);
  local[0] = rot_z<S>(row[0]) * exp_map_matrix<S>(Vec3T<S>(row[1], row[2], row[3]));
  for (int j = 1; j < num_joints; ++j)
    local[j] = exp_map_matrix<S>(Vec3T<S>(row[1 + 3 * j], row[2 + 3 * j], row[3 + 3 * j]));
  return local;
}

struct LossWeights {
  double step_weight = 1.0;  // w, scales the gradient step
  double lambda_smooth = 1e-2;
  double lambda_init = 1e-3;
};

/// Masked SOS loss over direct parameters:
///   || M_d(q) - d ||_2 + lambda_smooth * sum ||accel||^2 + lambda_init * ||theta - theta0||^2
class SosObjective {
 public:
  SosObjective(const Motion& base, const SOSScript& script, double beta, LossWeights weights,
               Eigen::MatrixXd theta0)
      : base_(base), script_(script), beta_(beta), weights_(weights), theta0_(std::move(theta0)) {
    for (const SOSEntry& e : script_.entries) by_frame_[e.frame].push_back(e);
  }

  const Eigen::MatrixXd& theta0() const { return theta0_; }

  double value(const Eigen::MatrixXd& theta) const { return evaluate(theta, nullptr); }

  double value_and_gradient(const Eigen::MatrixXd& theta, Eigen::MatrixXd& grad) const {
    grad = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    return evaluate(theta, &grad);
  }

  /// Sum of squared entry residuals at the given parameters.
  double entry_sum_squares(const Eigen::MatrixXd& theta) const {
    const Motion m = decode_direct(theta, base_);
    const OrientationFeatures f = extract_orientation_features(m);
    const auto dirs = unit_directions(f);
    double total = 0.0;
    for (const SOSEntry& e : script_.entries) {
      const auto u = templates().for_part(e.part);
      const Vec3 q = soft_quantize_direction<double>(dirs[e.frame][index(e.part)], u, beta_);
      total += (q - u[e.symbol]).squaredNorm();
    }
    return total;
  }

 private:
  using AD = Eigen::AutoDiffScalar<Eigen::VectorXd>;

  double evaluate(const Eigen::MatrixXd& theta, Eigen::MatrixXd* grad) const {
    const int n = static_cast<int>(theta.rows());
    const int d = static_cast<int>(theta.cols());
    const int joints = base_.num_joints();
    double total = 0.0;

    if (!script_.entries.empty()) {
      const Motion m = decode_direct(theta, base_);
      const JointTrajectories traj = forward_kinematics(m, true);
      const ReferenceFrames frames = reference_frames(traj, m.skeleton);
      const OrientationFeatures feats = features_from_trajectories(traj, m.skeleton);
      const auto held_dirs = unit_directions(feats);

      double sum_sq = 0.0;
      Eigen::MatrixXd sum_sq_grad;
      if (grad) sum_sq_grad = Eigen::MatrixXd::Zero(n, d);
      for (const auto& [frame, entries] : by_frame_) {
        if (!grad) {
          for (const SOSEntry& e : entries) {
            const auto u = templates().for_part(e.part);
            const Vec3 q = soft_quantize_direction<double>(held_dirs[frame][index(e.part)], u, beta_);
            sum_sq += checked((q - u[e.symbol]).squaredNorm(), e);
          }
          continue;
        }
        Eigen::Matrix<AD, Eigen::Dynamic, 1> row(d);
        for (int k = 0; k < d; ++k) row[k] = AD(theta(frame, k), d, k);
        const auto local = local_rotations<AD>(row, joints);
        const auto pos = fk_pose<AD>(m.skeleton, std::span<const Mat3T<AD>>(local), Vec3T<AD>::Zero());
        const std::span<const Vec3T<AD>> pos_span(pos);
        Mat3T<AD> basis;
        if (frames.held[frame]) {
          basis = frames.r[frame].cast<AD>();
        } else {
          basis = *reference_frame_at<AD>(pos_span, m.skeleton);
        }
        const auto raw = features_at<AD>(pos_span, basis, m.skeleton);
        AD frame_sum(0.0, d, 0);
        frame_sum.derivatives().setZero();
        for (const SOSEntry& e : entries) {
          const auto u = templates().for_part(e.part);
          Vec3T<AD> dir;
          if (feats.degenerate[frame][index(e.part)]) {
            dir = held_dirs[frame][index(e.part)].cast<AD>();
          } else {
            using std::sqrt;
            const Vec3T<AD>& o = raw[index(e.part)];
            dir = o / sqrt(o.squaredNorm());
          }
          const Vec3T<AD> q = soft_quantize_direction<AD>(dir, u, beta_);
          const AD r2 = (q - u[e.symbol].cast<AD>()).squaredNorm();
          checked(r2.value(), e);
          frame_sum += r2;
        }
        sum_sq += frame_sum.value();
        if (frame_sum.derivatives().size() == d) sum_sq_grad.row(frame) += frame_sum.derivatives().transpose();
      }
      const double norm = std::sqrt(sum_sq);
      total += norm;
      if (grad && norm > 0.0) *grad += sum_sq_grad / (2.0 * norm);
    }

    if (weights_.lambda_smooth > 0.0 && n >= 3) {
      const double ls = weights_.lambda_smooth;
      for (int t = 1; t + 1 < n; ++t) {
        const Eigen::RowVectorXd acc = theta.row(t + 1) - 2.0 * theta.row(t) + theta.row(t - 1);
        total += ls * acc.squaredNorm();
        if (grad) {
          grad->row(t + 1) += 2.0 * ls * acc;
          grad->row(t) -= 4.0 * ls * acc;
          grad->row(t - 1) += 2.0 * ls * acc;
        }
      }
    }
    if (weights_.lambda_init > 0.0) {
      const Eigen::MatrixXd diff = theta - theta0_;
      total += weights_.lambda_init * diff.squaredNorm();
      if (grad) *grad += 2.0 * weights_.lambda_init * diff;
    }
    return total;
  }

  static double checked(double v, const SOSEntry& e) {
    if (!std::isfinite(v))
      throw OptimizationError("non-finite loss at entry (" + part_name(e.part) + ", frame " + std::to_string(e.frame) +
                              ", " + symbol_name(e.symbol, e.part) + ")");
    return v;
  }

  const Motion& base_;
  const SOSScript& script_;
  double beta_;
  LossWeights weights_;
  Eigen::MatrixXd theta0_;
  std::map<int, std::vector<SOSEntry>> by_frame_;
};

// ---------------------------------------------------------------------------
// Problem / result

enum class ParamMode { Direct, Periodic };
enum class StepRule { LineSearch, Fixed };

inline std::string mode_name(ParamMode m) { return m == ParamMode::Direct ? "direct" : "periodic"; }

inline ParamMode mode_from_name(std::string_view s) {
  if (s == "direct") return ParamMode::Direct;
  if (s == "periodic") return ParamMode::Periodic;
  throw ValidationError("unknown mode '" + std::string(s) + "'; valid modes: direct, periodic");
}

struct OptimizationProblem {
  Motion initial;
  SOSScript target;
  ParamMode mode = ParamMode::Direct;
  LossWeights weights;
  double beta = 10.0;
  int max_iters = 100;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::LineSearch;
  int harmonics = 4;  // periodic mode only
  double armijo_c = 1e-4;
};

struct OptimizationResult {
  Motion motion;
  std::vector<double> loss_trace;
  double sos_acc = 0.0;
  double l2_rot6d = 0.0;
  bool converged = false;  // every script entry satisfied
  int iterations = 0;
};

inline void validate(const OptimizationProblem& p) {
  validate(p.initial);
  validate(p.target);
  if (p.target.num_frames != p.initial.num_frames())
    throw ValidationError("script has " + std::to_string(p.target.num_frames) + " frames, motion has " +
                          std::to_string(p.initial.num_frames()));
  if (!(p.weights.step_weight >= 0.0) || !(p.weights.lambda_smooth >= 0.0) || !(p.weights.lambda_init >= 0.0))
    throw ValidationError("optimizer weights must be non-negative");
  if (p.max_iters < 0) throw ValidationError("max_iters must be non-negative");
  if (!(p.beta > 0.0)) throw ValidationError("beta must be positive");
  if (p.harmonics < 1) throw ValidationError("harmonics must be at least 1");
}

/// Loss and gradient over a flat variable vector for either mode.
class FlatObjective {
 public:
  FlatObjective(const OptimizationProblem& p, const SosObjective& direct)
      : problem_(p), direct_(direct), frames_(p.initial.num_frames()),
        stride_(direct_stride(p.initial.num_joints())) {
    if (p.mode == ParamMode::Periodic) periodic_ = fit_periodic(direct.theta0(), p.harmonics);
  }

  Eigen::VectorXd initial() const {
    if (problem_.mode == ParamMode::Periodic) return periodic_.to_vector();
    return Eigen::Map<const Eigen::VectorXd>(direct_.theta0().data(), direct_.theta0().size());
  }

  Eigen::MatrixXd theta(const Eigen::VectorXd& x) const {
    if (problem_.mode == ParamMode::Periodic) {
      PeriodicParams p = periodic_;
      p.assign(x);
      return reconstruct_periodic(p, frames_);
    }
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), frames_, stride_);
  }

  double value(const Eigen::VectorXd& x) const { return direct_.value(theta(x)); }

  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    Eigen::MatrixXd gt;
    const double v = direct_.value_and_gradient(theta(x), gt);
    if (problem_.mode == ParamMode::Periodic) {
      PeriodicParams p = periodic_;
      p.assign(x);
      g = reconstruct_periodic_vjp(p, frames_, gt);
    } else {
      g = Eigen::Map<const Eigen::VectorXd>(gt.data(), gt.size());
    }
    return v;
  }

 private:
  const OptimizationProblem& problem_;
  const SosObjective& direct_;
  int frames_;
  int stride_;
  PeriodicParams periodic_;
};

/// Gradient descent on the SOS loss (x <- x - eta * w * grad) with
/// Armijo backtracking or a fixed step.
inline OptimizationResult optimize(const OptimizationProblem& problem) {
  validate(problem);
  OptimizationResult result;
  if (problem.max_iters == 0) {
    result.motion = problem.initial;
    result.sos_acc = sos_accuracy(result.motion, problem.target);
    result.l2_rot6d = 0.0;
    result.converged = result.sos_acc == 1.0;
    return result;
  }

  const SosObjective direct(problem.initial, problem.target, problem.beta, problem.weights,
                            encode_direct(problem.initial));
  const FlatObjective objective(problem, direct);

  Eigen::VectorXd x = objective.initial();
  Eigen::VectorXd g;
  double loss = objective.value_and_gradient(x, g);
  if (!std::isfinite(loss)) throw OptimizationError("non-finite initial loss");
  result.loss_trace.push_back(loss);

  const double w = problem.weights.step_weight;
  double step = w;
  for (int it = 0; it < problem.max_iters; ++it) {
    const double g2 = g.squaredNorm();
    if (g2 == 0.0 || w == 0.0) break;
    Eigen::VectorXd next;
    double next_loss = 0.0;
    if (problem.step_rule == StepRule::Fixed) {
      next = x - w * g;
      next_loss = objective.value(next);
      if (!std::isfinite(next_loss)) throw OptimizationError("non-finite loss after fixed step " + std::to_string(it));
    } else {
      bool accepted = false;
      double trial = step;
      for (int k = 0; k < 60; ++k) {
        next = x - trial * g;
        next_loss = objective.value(next);
        if (std::isfinite(next_loss) && next_loss <= loss - problem.armijo_c * trial * g2) {
          accepted = true;
          break;
        }
        trial *= 0.5;
      }
      if (!accepted) break;
      step = std::min(2.0 * trial, 1e6 * std::max(w, 1e-12));
    }
    const double change = loss - next_loss;
    x = std::move(next);
    loss = objective.value_and_gradient(x, g);
    result.loss_trace.push_back(loss);
    ++result.iterations;
    if (std::abs(change) < problem.tolerance) break;
  }

  result.motion = decode_direct(objective.theta(x), problem.initial);
  result.sos_acc = sos_accuracy(result.motion, problem.target);
  result.l2_rot6d = l2_rot6d(result.motion, problem.initial);
  result.converged = result.sos_acc == 1.0;
  return result;
}

inline std::string loss_trace_csv(const std::vector<double>& trace) {
  std::string out = "iteration,loss\n";
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, trace[i]);
    out += buf;
  }
  return out;
}

}  // namespace soskit
