#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "soskit/optimizer.hpp"
#include "soskit/synthetic.hpp"
#include "tasks.hpp"

using namespace soskit;

namespace {

// Worst gradient mismatch, as a multiple of the allowed error: 1e-4
// relative plus the roundoff floor of a central difference at h.
double worst_gradient_error(const FlatObjective& obj, const Eigen::VectorXd& x) {
  Eigen::VectorXd g;
  const double f = obj.value_and_gradient(x, g);
  const double h = 1e-5;
  const double floor = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f)) / h;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (obj.value(xp) - obj.value(xm)) / (2 * h);
    const double scale = std::max(std::abs(fd), std::abs(g[i]));
    if (scale < 1e-8) continue;
    worst = std::max(worst, std::abs(fd - g[i]) / (1e-4 * scale + floor));
  }
  return worst;
}

OptimizationProblem small_problem(std::uint64_t seed, ParamMode mode, int frames = 8) {
  const Motion truth = synthetic::random_smooth(seed, synthetic::minimal(), frames);
  OptimizationProblem p;
  p.target = extract_sos(truth, 0.0).script;
  p.initial = synthetic::perturb(truth, 0.3, seed + 7);
  p.mode = mode;
  return p;
}

}  // namespace

TEST(Metrics, AccuracyOnSourceMotionIsOne) {
  const Motion m = synthetic::random_smooth(1, synthetic::humanoid(), 40);
  const SOSScript s = extract_sos(m, 0.3).script;
  ASSERT_FALSE(s.entries.empty());
  EXPECT_EQ(sos_accuracy(m, s), 1.0);
}

TEST(Metrics, AccuracyAllWrongIsZero) {
  const Motion m = synthetic::random_smooth(2, synthetic::humanoid(), 40);
  SOSScript s = extract_sos(m, 0.3).script;
  for (auto& e : s.entries) e.symbol = (e.symbol + 1) % num_symbols(e.part);
  EXPECT_EQ(sos_accuracy(m, s), 0.0);
}

TEST(Metrics, AccuracyEmptyScriptAndMismatch) {
  const Motion m = synthetic::static_pose(synthetic::humanoid(), 5);
  SOSScript s;
  s.num_frames = 5;
  EXPECT_EQ(sos_accuracy(m, s), 1.0);
  s.num_frames = 6;
  EXPECT_THROW(sos_accuracy(m, s), ValidationError);
}

TEST(Metrics, L2Rot6dYawExample) {
  Motion a;
  a.skeleton.joints = {{"root", -1, Vec3::Zero()}};
  a.frames = {Pose{Vec3::Zero(), {Quat::Identity()}}};
  Motion b = a;
  b.frames[0].rotations[0] = quat_z(std::numbers::pi / 2);
  EXPECT_NEAR(l2_rot6d(a, b), 2.0, 1e-12);
  EXPECT_EQ(l2_rot6d(a, a), 0.0);
  Motion c = a;
  c.frames.push_back(c.frames[0]);
  EXPECT_THROW(l2_rot6d(a, c), ValidationError);
}

TEST(DirectParams, EncodeDecodeRoundTrip) {
  const Motion m = synthetic::random_smooth(3, synthetic::humanoid(), 30);
  const Motion back = decode_direct(encode_direct(m), m);
  EXPECT_TRUE(approx_equal(back, m, 1e-9));
  EXPECT_EQ(encode_direct(m).cols(), direct_stride(m.num_joints()));
}

TEST(DirectParams, YawIsUnwrapped) {
  Motion m = synthetic::static_pose(synthetic::humanoid(), 50);
  for (int t = 0; t < 50; ++t) m.frames[t].rotations[0] = quat_z(0.3 * t);
  const Eigen::MatrixXd theta = encode_direct(m);
  for (int t = 1; t < 50; ++t) EXPECT_NEAR(theta(t, 0) - theta(t - 1, 0), 0.3, 1e-9);
}

TEST(Loss, EmptyScriptNoRegularizersIsZero) {
  const Motion m = synthetic::random_smooth(4, synthetic::minimal(), 6);
  SOSScript s;
  s.num_frames = 6;
  const SosObjective obj(m, s, 10.0, LossWeights{1.0, 0.0, 0.0}, encode_direct(m));
  Eigen::MatrixXd grad;
  EXPECT_EQ(obj.value_and_gradient(encode_direct(m), grad), 0.0);
  EXPECT_EQ(grad.norm(), 0.0);
}

TEST(Loss, MatchingEntryContributesNothing) {
  const Motion m = synthetic::static_pose(synthetic::humanoid(), 4);
  SOSScript s;
  s.num_frames = 4;
  s.entries = {{BodyPart::RA, 2, symbol_id("Right-Middle", BodyPart::RA)}};
  const SosObjective obj(m, s, 200.0, LossWeights{1.0, 0.0, 0.0}, encode_direct(m));
  EXPECT_LE(obj.entry_sum_squares(encode_direct(m)), 1e-20);
  EXPECT_LE(obj.value(encode_direct(m)), 1e-10);
}

TEST(Loss, RegularizersVanishAtStart) {
  const Motion m = synthetic::static_pose(synthetic::minimal(), 6);
  SOSScript s;
  s.num_frames = 6;
  const SosObjective obj(m, s, 10.0, LossWeights{}, encode_direct(m));
  EXPECT_EQ(obj.value(encode_direct(m)), 0.0);
}

TEST(Gradient, DirectMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const OptimizationProblem p = small_problem(seed, ParamMode::Direct);
    ASSERT_FALSE(p.target.entries.empty());
    const SosObjective direct(p.initial, p.target, p.beta, p.weights, encode_direct(p.initial));
    const FlatObjective obj(p, direct);
    EXPECT_LE(worst_gradient_error(obj, obj.initial()), 1.0) << "seed " << seed;
  }
}

TEST(Gradient, PeriodicMatchesFiniteDifferences) {
  for (std::uint64_t seed : {4, 5, 19}) {
    OptimizationProblem p = small_problem(seed, ParamMode::Periodic);
    p.harmonics = 2;
    const SosObjective direct(p.initial, p.target, p.beta, p.weights, encode_direct(p.initial));
    const FlatObjective obj(p, direct);
    EXPECT_LE(worst_gradient_error(obj, obj.initial()), 1.0) << "seed " << seed;
  }
}

TEST(Optimize, ZeroIterationsReturnsInput) {
  const auto task = tasks::perturbation_task(1);
  const OptimizationResult r = optimize(tasks::problem_for(task, 0));
  EXPECT_TRUE(approx_equal(r.motion, task.perturbed, 0.0));
  EXPECT_EQ(r.sos_acc, sos_accuracy(task.perturbed, task.script));
  EXPECT_TRUE(r.loss_trace.empty());
}

TEST(Optimize, LineSearchTraceIsMonotone) {
  const auto task = tasks::perturbation_task(2);
  const OptimizationResult r = optimize(tasks::problem_for(task, 30));
  ASSERT_GE(r.loss_trace.size(), 2u);
  for (size_t i = 1; i < r.loss_trace.size(); ++i) EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1]);
}

TEST(Optimize, DeterministicTrace) {
  const auto task = tasks::perturbation_task(3);
  const OptimizationResult a = optimize(tasks::problem_for(task, 20));
  const OptimizationResult b = optimize(tasks::problem_for(task, 20));
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_TRUE(approx_equal(a.motion, b.motion, 0.0));
}

TEST(Optimize, RecoversPerturbedScript) {
  for (std::uint64_t seed : {5, 6}) {
    const auto task = tasks::perturbation_task(seed);
    const OptimizationResult r = optimize(tasks::problem_for(task, 100));
    EXPECT_GE(r.sos_acc, 0.95) << "seed " << seed;
    EXPECT_EQ(r.converged, r.sos_acc == 1.0);
  }
}

TEST(Optimize, PeriodicKeepsMotionSmooth) {
  const auto task = tasks::perturbation_task(7, 0.05);
  const OptimizationResult r = optimize(tasks::problem_for(task, 40, ParamMode::Periodic));
  auto max_accel = [](const Eigen::MatrixXd& theta) {
    double worst = 0.0;
    for (Eigen::Index t = 1; t + 1 < theta.rows(); ++t)
      worst = std::max(worst, (theta.row(t + 1) - 2.0 * theta.row(t) + theta.row(t - 1)).norm());
    return worst;
  };
  EXPECT_LE(max_accel(encode_direct(r.motion)), 3.0 * max_accel(encode_direct(task.perturbed)));
  EXPECT_TRUE(std::isfinite(r.loss_trace.back()));
  EXPECT_LE(r.loss_trace.back(), r.loss_trace.front());
}

TEST(Optimize, FrameMismatchRejected) {
  auto task = tasks::perturbation_task(8);
  task.script.num_frames += 1;
  EXPECT_THROW(optimize(tasks::problem_for(task)), ValidationError);
}

TEST(Optimize, ModeNames) {
  EXPECT_EQ(mode_from_name("periodic"), ParamMode::Periodic);
  EXPECT_EQ(mode_name(ParamMode::Direct), "direct");
  EXPECT_THROW(mode_from_name("spline"), ValidationError);
}

TEST(Optimize, LossTraceCsv) {
  EXPECT_EQ(loss_trace_csv({2.0, 1.5}).substr(0, 15), "iteration,loss\n");
}
