#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <list>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "soskit/body_part.hpp"
#include "soskit/error.hpp"
#include "soskit/orientation.hpp"
#include "soskit/quantizer.hpp"

namespace soskit {

/// Per part, T x C central differences of the template similarities
/// (C = 8 for the root, 26 otherwise).
using DiffFeatures = std::array<Eigen::MatrixXd, kNumParts>;

inline Eigen::MatrixXd similarity_features(const std::vector<Vec3>& dirs, std::span<const Vec3> u) {
  Eigen::MatrixXd sim(static_cast<Eigen::Index>(dirs.size()), static_cast<Eigen::Index>(u.size()));
  for (size_t t = 0; t < dirs.size(); ++t)
    for (size_t k = 0; k < u.size(); ++k)
      sim(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = dirs[t].dot(u[k]);
  return sim;
}

/// Central difference along rows; one-sided at both ends.
inline Eigen::MatrixXd central_difference(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw ValidationError("central difference needs at least 2 frames");
  Eigen::MatrixXd d(n, x.cols());
  d.row(0) = x.row(1) - x.row(0);
  d.row(n - 1) = x.row(n - 1) - x.row(n - 2);
  for (Eigen::Index t = 1; t + 1 < n; ++t) d.row(t) = (x.row(t + 1) - x.row(t - 1)) / 2.0;
  return d;
}

inline DiffFeatures diff_features(const OrientationFeatures& f, const TemplateSet& ts = templates()) {
  if (f.num_frames() < 2) throw ValidationError("diff features need at least 2 frames");
  const auto dirs = unit_directions(f);
  DiffFeatures out;
  for (BodyPart p : kAllParts) {
    std::vector<Vec3> part_dirs(dirs.size());
    for (size_t t = 0; t < dirs.size(); ++t) part_dirs[t] = dirs[t][index(p)];
    out[index(p)] = central_difference(similarity_features(part_dirs, ts.for_part(p)));
  }
  return out;
}

/// Ward variance increase of merging two clusters.
inline double ward_delta(double n_a, const Eigen::VectorXd& mean_a, double n_b, const Eigen::VectorXd& mean_b) {
  return (n_a * n_b / (n_a + n_b)) * (mean_a - mean_b).squaredNorm();
}

/// Reported merge distance sqrt(2 * delta); equals the Euclidean
/// distance for two singletons.
inline double ward_merge_cost(double n_a, const Eigen::VectorXd& mean_a, double n_b, const Eigen::VectorXd& mean_b) {
  return std::sqrt(2.0 * ward_delta(n_a, mean_a, n_b, mean_b));
}

struct SegmentNode {
  int left = -1;   // node ids; < num_frames are leaves
  int right = -1;
  double distance = 0.0;
  int boundary_frame = 0;  // first frame of the right child
  int start = 0;           // covered frames [start, end)
  int end = 0;
};

/// Internal nodes in merge order; node i has id num_frames + i.
struct SegmentTree {
  int num_frames = 0;
  std::vector<SegmentNode> nodes;
};

/// Greedy agglomeration of temporally adjacent clusters under Ward
/// linkage. Ties go to the earliest boundary.
inline SegmentTree build_segment_tree(const Eigen::MatrixXd& features) {
  const int n = static_cast<int>(features.rows());
  if (n < 2) throw ValidationError("segment tree needs at least 2 frames");

  struct Cluster {
    int id;
    int start;
    int end;
    Eigen::VectorXd mean;
  };
  // Keyed by start frame; adjacency is map order.
  std::map<int, Cluster> clusters;
  for (int t = 0; t < n; ++t) clusters.emplace(t, Cluster{t, t, t + 1, features.row(t).transpose()});

  std::set<std::pair<double, int>> queue;  // (delta, boundary)
  std::map<int, double> pending;           // boundary -> delta
  auto push_pair = [&](const Cluster& a, const Cluster& b) {
    const double d = ward_delta(a.end - a.start, a.mean, b.end - b.start, b.mean);
    queue.emplace(d, b.start);
    pending[b.start] = d;
  };
  auto drop_pair = [&](int boundary) {
    auto it = pending.find(boundary);
    if (it == pending.end()) return;
    queue.erase({it->second, boundary});
    pending.erase(it);
  };
  for (int t = 1; t < n; ++t) push_pair(clusters.at(t - 1), clusters.at(t));

  SegmentTree tree;
  tree.num_frames = n;
  tree.nodes.reserve(n - 1);
  while (!queue.empty()) {
    const auto [delta, boundary] = *queue.begin();
    drop_pair(boundary);
    auto right_it = clusters.find(boundary);
    auto left_it = std::prev(right_it);
    Cluster& left = left_it->second;
    const Cluster right = right_it->second;

    if (left_it != clusters.begin()) drop_pair(left.start);
    auto next_it = std::next(right_it);
    if (next_it != clusters.end()) drop_pair(next_it->first);

    const double na = left.end - left.start;
    const double nb = right.end - right.start;
    SegmentNode node;
    node.left = left.id;
    node.right = right.id;
    node.distance = std::sqrt(2.0 * std::max(delta, 0.0));
    node.boundary_frame = right.start;
    node.start = left.start;
    node.end = right.end;
    tree.nodes.push_back(node);

    left.mean = (na * left.mean + nb * right.mean) / (na + nb);
    left.end = right.end;
    left.id = n + static_cast<int>(tree.nodes.size()) - 1;
    clusters.erase(right_it);

    if (left_it != clusters.begin()) push_pair(std::prev(left_it)->second, left);
    next_it = std::next(left_it);
    if (next_it != clusters.end()) push_pair(left, next_it->second);
  }
  return tree;
}

using SaliencyTrack = std::vector<double>;

inline SaliencyTrack saliency_track(const SegmentTree& tree) {
  SaliencyTrack s(static_cast<size_t>(tree.num_frames), 0.0);
  for (const SegmentNode& node : tree.nodes) s[node.boundary_frame] = node.distance;
  return s;
}

struct SaliencyResult {
  std::array<SegmentTree, kNumParts> trees;
  std::array<SaliencyTrack, kNumParts> tracks;
  double global_max = 0.0;
};

inline double global_max_of(const std::array<SaliencyTrack, kNumParts>& tracks) {
  double m = 0.0;
  for (const auto& track : tracks)
    for (double v : track) m = std::max(m, v);
  return m;
}

inline SaliencyResult saliency_all_parts(const OrientationFeatures& f) {
  const DiffFeatures diff = diff_features(f);
  SaliencyResult out;
  for (int p = 0; p < kNumParts; ++p) {
    out.trees[p] = build_segment_tree(diff[p]);
    out.tracks[p] = saliency_track(out.trees[p]);
  }
  out.global_max = global_max_of(out.tracks);
  return out;
}

inline nlohmann::ordered_json dendrogram_json(const SegmentTree& tree) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    const SegmentNode& n = tree.nodes[i];
    nodes.push_back({{"id", tree.num_frames + static_cast<int>(i)},
                     {"left", n.left},
                     {"right", n.right},
                     {"distance", n.distance},
                     {"boundary_frame", n.boundary_frame},
                     {"start", n.start},
                     {"end", n.end}});
  }
  return {{"num_frames", tree.num_frames}, {"nodes", std::move(nodes)}};
}

}  // namespace soskit
