#pragma once

// Naive reference for contiguity-constrained Ward clustering. Every step
// recomputes the sum-of-squares increase from the raw member rows, so it
// shares nothing with the incremental implementation under test.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

struct Merge {
  int boundary;  // first frame of the right segment
  double distance;
};

inline double sse(const Eigen::MatrixXd& x, int start, int end) {
  const Eigen::RowVectorXd mean = x.middleRows(start, end - start).colwise().mean();
  double total = 0.0;
  for (int t = start; t < end; ++t) total += (x.row(t) - mean).squaredNorm();
  return total;
}

inline std::vector<Merge> ward_merges(const Eigen::MatrixXd& x) {
  std::vector<std::pair<int, int>> segs;
  for (int t = 0; t < x.rows(); ++t) segs.push_back({t, t + 1});
  std::vector<Merge> merges;
  while (segs.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    size_t at = 0;
    for (size_t i = 0; i + 1 < segs.size(); ++i) {
      const double inc = sse(x, segs[i].first, segs[i + 1].second) - sse(x, segs[i].first, segs[i].second) -
                         sse(x, segs[i + 1].first, segs[i + 1].second);
      if (i == 0 || inc < best - 1e-12 * std::max(1.0, std::abs(best))) {
        best = inc;
        at = i;
      }
    }
    merges.push_back({segs[at + 1].first, std::sqrt(2.0 * std::max(0.0, best))});
    segs[at].second = segs[at + 1].second;
    segs.erase(segs.begin() + static_cast<long>(at) + 1);
  }
  return merges;
}

inline std::vector<double> saliency(const Eigen::MatrixXd& x) {
  std::vector<double> s(static_cast<size_t>(x.rows()), 0.0);
  for (const Merge& m : ward_merges(x)) s[m.boundary] = m.distance;
  return s;
}

}  // namespace oracle
