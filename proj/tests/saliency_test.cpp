#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "soskit/saliency.hpp"
#include "soskit/synthetic.hpp"
#include "ward_oracle.hpp"

using namespace soskit;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double d : v) x(i++, 0) = d;
  return x;
}

Eigen::MatrixXd random_features(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) x(r, c) = g(rng);
  return x;
}

}  // namespace

TEST(DiffFeatures, CentralDifference) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2,  //
      4, 8,   //
      9, 3;
  const Eigen::MatrixXd d = central_difference(x);
  EXPECT_EQ(d.row(1), Eigen::RowVector2d(4, 0.5));
  EXPECT_EQ(d.row(0), Eigen::RowVector2d(3, 6));
  EXPECT_EQ(d.row(2), Eigen::RowVector2d(5, -5));
}

TEST(DiffFeatures, LinearRampInteriorConstant) {
  Eigen::MatrixXd x(6, 3);
  const Eigen::RowVector3d v(0.5, -1.0, 2.0);
  for (int t = 0; t < 6; ++t) x.row(t) = t * v;
  const Eigen::MatrixXd d = central_difference(x);
  for (int t = 1; t < 5; ++t) EXPECT_LE((d.row(t) - v).norm(), 1e-15);
}

TEST(DiffFeatures, StaticMotionIsZero) {
  const Motion m = synthetic::static_pose(synthetic::humanoid(), 5);
  const auto d = diff_features(extract_orientation_features(m));
  EXPECT_EQ(d[index(BodyPart::RT)].cols(), 8);
  EXPECT_EQ(d[index(BodyPart::LA)].cols(), 26);
  for (const auto& part : d) EXPECT_EQ(part.norm(), 0.0);
}

TEST(WardCost, SingletonsAndEqualMeans) {
  const Eigen::Vector3d p(1, 2, 3), q(4, 6, 3);
  EXPECT_NEAR(ward_merge_cost(1, p, 1, q), 5.0, 1e-12);
  EXPECT_EQ(ward_merge_cost(3, p, 7, p), 0.0);
  EXPECT_EQ(ward_merge_cost(2, p, 5, q), ward_merge_cost(5, q, 2, p));
}

TEST(SegmentTree, FourPointExample) {
  const SegmentTree tree = build_segment_tree(column({0, 0, 10, 10}));
  ASSERT_EQ(tree.nodes.size(), 3u);
  EXPECT_EQ(tree.nodes[0].boundary_frame, 1);
  EXPECT_EQ(tree.nodes[0].distance, 0.0);
  EXPECT_EQ(tree.nodes[1].boundary_frame, 3);
  EXPECT_EQ(tree.nodes[1].distance, 0.0);
  EXPECT_NEAR(tree.nodes[2].distance, 14.142135623730951, 1e-12);
  const auto s = saliency_track(tree);
  const auto expected = oracle::saliency(column({0, 0, 10, 10}));
  ASSERT_EQ(s.size(), 4u);
  for (size_t i = 0; i < 4; ++i) EXPECT_NEAR(s[i], expected[i], 1e-12);
  EXPECT_NEAR(s[2], 14.1421, 1e-4);
}

TEST(SegmentTree, TwoFrames) {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0,  //
      3, 4;
  const SegmentTree tree = build_segment_tree(x);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_EQ(tree.nodes[0].boundary_frame, 1);
  EXPECT_NEAR(tree.nodes[0].distance, 5.0, 1e-12);
}

TEST(SegmentTree, ConstantSignalAllZero) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(9, 4, 2.5);
  for (double v : saliency_track(build_segment_tree(x))) EXPECT_EQ(v, 0.0);
}

TEST(SegmentTree, MatchesBruteForceOracle) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = 2 + static_cast<int>(rng() % 30);
    const Eigen::MatrixXd x = random_features(rng, rows, 1 + static_cast<int>(rng() % 5));
    const SegmentTree tree = build_segment_tree(x);
    const auto merges = oracle::ward_merges(x);
    ASSERT_EQ(tree.nodes.size(), merges.size());
    for (size_t i = 0; i < merges.size(); ++i) {
      EXPECT_EQ(tree.nodes[i].boundary_frame, merges[i].boundary);
      EXPECT_NEAR(tree.nodes[i].distance, merges[i].distance, 1e-9);
    }
  }
}

TEST(SegmentTree, BoundariesAreABijection) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng() % 50);
    const SegmentTree tree = build_segment_tree(random_features(rng, rows, 3));
    std::set<int> seen;
    for (const auto& n : tree.nodes) {
      EXPECT_TRUE(seen.insert(n.boundary_frame).second);
      EXPECT_GT(n.boundary_frame, n.start);
      EXPECT_LT(n.boundary_frame, n.end);
    }
    EXPECT_EQ(seen.size(), static_cast<size_t>(rows - 1));
    EXPECT_EQ(*seen.begin(), 1);
    EXPECT_EQ(*seen.rbegin(), rows - 1);
    EXPECT_EQ(tree.nodes.back().start, 0);
    EXPECT_EQ(tree.nodes.back().end, rows);
  }
}

TEST(SaliencyTrack, StepAtFrameK) {
  for (int k = 1; k < 20; ++k) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(20, 3);
    for (int t = k; t < 20; ++t) x.row(t) = Eigen::RowVector3d(1.0, -0.5, 0.25);
    const auto s = saliency_track(build_segment_tree(x));
    EXPECT_EQ(std::max_element(s.begin(), s.end()) - s.begin(), k);
    EXPECT_EQ(s[0], 0.0);
  }
}

TEST(SaliencyTrack, ConstantOffsetInvariant) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd x = random_features(rng, 30, 4);
    Eigen::MatrixXd shifted = x;
    shifted.rowwise() += Eigen::RowVector4d(3, -1, 7, 0.5);
    const auto a = saliency_track(build_segment_tree(x));
    const auto b = saliency_track(build_segment_tree(shifted));
    for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(SaliencyTrack, TimeReversalMirrorsBoundaries) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const int rows = 24;
    const Eigen::MatrixXd x = random_features(rng, rows, 3);
    const Eigen::MatrixXd reversed = x.colwise().reverse();
    const auto a = saliency_track(build_segment_tree(x));
    const auto b = saliency_track(build_segment_tree(reversed));
    for (int f = 1; f < rows; ++f) EXPECT_NEAR(a[f], b[rows - f], 1e-9);
  }
}

TEST(SaliencyAllParts, StaticMotion) {
  const auto r = saliency_all_parts(extract_orientation_features(synthetic::static_pose(synthetic::humanoid(), 10)));
  EXPECT_EQ(r.global_max, 0.0);
}

TEST(SaliencyAllParts, OnlyLeftArmMoves) {
  const auto r = saliency_all_parts(extract_orientation_features(synthetic::arm_swing()));
  for (BodyPart p : kAllParts) {
    const auto& s = r.tracks[index(p)];
    const double peak = *std::max_element(s.begin(), s.end());
    if (p == BodyPart::LA)
      EXPECT_GT(peak, 0.0);
    else
      EXPECT_EQ(peak, 0.0) << part_name(p);
  }
  EXPECT_EQ(r.global_max, *std::max_element(r.tracks[index(BodyPart::LA)].begin(), r.tracks[index(BodyPart::LA)].end()));
}

TEST(SaliencyAllParts, DendrogramJson) {
  const auto j = dendrogram_json(build_segment_tree(column({0, 0, 10, 10})));
  EXPECT_EQ(j["num_frames"], 4);
  ASSERT_EQ(j["nodes"].size(), 3u);
  EXPECT_EQ(j["nodes"][2]["id"], 6);
  EXPECT_EQ(j["nodes"][2]["left"], 4);
  EXPECT_EQ(j["nodes"][2]["right"], 5);
}
