#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "soskit/body_part.hpp"
#include "soskit/error.hpp"
#include "soskit/orientation.hpp"
#include "soskit/rotation.hpp"

namespace soskit {

inline constexpr int kNumDirections = 8;
inline constexpr int kNumLimbSymbols = 26;
inline constexpr int kNumRootSymbols = 8;
inline constexpr int kPlaceLow = 24;
inline constexpr int kPlaceHigh = 25;

enum class Level : int { Low = 0, Middle = 1, Top = 2 };

// Clockwise from forward, as seen from above.
inline constexpr std::array<const char*, kNumDirections> kDirectionNames = {
    "Forward", "ForwardRight", "Right", "BackRight", "Back", "BackLeft", "Left", "ForwardLeft"};
inline constexpr std::array<const char*, 3> kLevelNames = {"Low", "Middle", "Top"};

struct TemplateSet {
  std::array<Vec3, kNumLimbSymbols> limb;
  std::array<Vec3, kNumRootSymbols> root;

  std::span<const Vec3> for_part(BodyPart p) const {
    if (is_root(p)) return {root.data(), root.size()};
    return {limb.data(), limb.size()};
  }
};

constexpr int symbol_index(Level level, int dir) { return static_cast<int>(level) * kNumDirections + dir; }

/// Unit horizontal vector of a direction index (0 = forward, 2 = right).
inline Vec3 horizontal_direction(int dir) {
  constexpr double d = M_SQRT1_2;
  static const std::array<Vec3, kNumDirections> table = {
      Vec3(0, 1, 0), Vec3(d, d, 0),   Vec3(1, 0, 0),  Vec3(d, -d, 0),
      Vec3(0, -1, 0), Vec3(-d, -d, 0), Vec3(-1, 0, 0), Vec3(-d, d, 0)};
  return table[dir];
}

inline TemplateSet build_templates() {
  TemplateSet ts;
  const double side = 1.0 / std::sqrt(10.0);
  const double vertical = 3.0 / std::sqrt(10.0);
  for (int d = 0; d < kNumDirections; ++d) {
    const Vec3 h = horizontal_direction(d);
    ts.root[d] = h;
    ts.limb[symbol_index(Level::Low, d)] = Vec3(h.x() * side, h.y() * side, -vertical);
    ts.limb[symbol_index(Level::Middle, d)] = h;
    ts.limb[symbol_index(Level::Top, d)] = Vec3(h.x() * side, h.y() * side, vertical);
  }
  ts.limb[kPlaceLow] = Vec3(0.0, 0.0, -1.0);
  ts.limb[kPlaceHigh] = Vec3(0.0, 0.0, 1.0);
  return ts;
}

inline const TemplateSet& templates() {
  static const TemplateSet ts = build_templates();
  return ts;
}

inline int num_symbols(BodyPart p) { return is_root(p) ? kNumRootSymbols : kNumLimbSymbols; }

inline bool valid_symbol(int id, BodyPart p) { return id >= 0 && id < num_symbols(p); }

inline std::string symbol_name(int id, BodyPart p) {
  if (!valid_symbol(id, p))
    throw ValidationError("symbol id " + std::to_string(id) + " is not valid for part " + part_name(p));
  if (is_root(p)) return kDirectionNames[id];
  if (id == kPlaceLow) return "Place-Low";
  if (id == kPlaceHigh) return "Place-High";
  return std::string(kDirectionNames[id % kNumDirections]) + "-" + kLevelNames[id / kNumDirections];
}

inline int symbol_id(std::string_view name, BodyPart p) {
  for (int id = 0; id < num_symbols(p); ++id)
    if (symbol_name(id, p) == name) return id;
  std::string valid;
  for (int id = 0; id < num_symbols(p); ++id) valid += (id ? ", " : "") + symbol_name(id, p);
  throw ValidationError("unknown symbol '" + std::string(name) + "' for part " + part_name(p) +
                        "; valid symbols: " + valid);
}

/// Symbol id of the left/right mirror image (reflection across x = 0).
inline int mirror_symbol(int id, BodyPart p) {
  if (!is_root(p) && (id == kPlaceLow || id == kPlaceHigh)) return id;
  const int dir = id % kNumDirections;
  const int mirrored = (kNumDirections - dir) % kNumDirections;
  return id - dir + mirrored;
}

/// softmax(beta * dir . u^T) . u for a unit direction.
template <class S>
Vec3T<S> soft_quantize_direction(const Vec3T<S>& dir, std::span<const Vec3> u, double beta) {
  using std::exp;
  std::vector<S> logits(u.size());
  double max_logit = -1e300;
  for (size_t k = 0; k < u.size(); ++k) {
    logits[k] = beta * dir.dot(u[k].template cast<S>());
    max_logit = std::max(max_logit, scalar_value(logits[k]));
  }
  S total(0);
  Vec3T<S> acc = Vec3T<S>::Zero();
  for (size_t k = 0; k < u.size(); ++k) {
    const S w = exp(logits[k] - max_logit);
    total += w;
    acc += w * u[k].template cast<S>();
  }
  return acc / total;
}

/// Soft quantization of a raw feature vector (normalized here).
template <class S>
Vec3T<S> soft_quantize_vector(const Vec3T<S>& o, std::span<const Vec3> u, double beta) {
  using std::sqrt;
  return soft_quantize_direction<S>(o / sqrt(o.squaredNorm()), u, beta);
}

/// argmax of dir . u^T; positive scaling of dir does not change it.
inline int hard_symbol(const Vec3& dir, std::span<const Vec3> u) {
  int best = 0;
  double best_dot = -1e300;
  for (size_t k = 0; k < u.size(); ++k) {
    const double d = dir.dot(u[k]);
    if (d > best_dot) {
      best_dot = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

inline int hard_symbol(const Vec3& dir, BodyPart p) { return hard_symbol(dir, templates().for_part(p)); }

struct QuantizedFeatures {
  std::vector<std::array<Vec3, kNumParts>> q;
  std::vector<std::array<int, kNumParts>> hard_ids;
  double beta = 0.0;
};

inline QuantizedFeatures soft_quantize(const OrientationFeatures& f, double beta) {
  if (!(beta > 0.0)) throw ValidationError("sharpness beta must be positive");
  const auto dirs = unit_directions(f);
  QuantizedFeatures out;
  out.beta = beta;
  out.q.resize(dirs.size());
  out.hard_ids.resize(dirs.size());
  for (size_t t = 0; t < dirs.size(); ++t) {
    for (BodyPart p : kAllParts) {
      const auto u = templates().for_part(p);
      out.q[t][index(p)] = soft_quantize_direction<double>(dirs[t][index(p)], u, beta);
      out.hard_ids[t][index(p)] = hard_symbol(dirs[t][index(p)], u);
    }
  }
  return out;
}

/// Per-frame argmax symbols, T x 6.
inline std::vector<std::array<int, kNumParts>> hard_quantize(const OrientationFeatures& f) {
  const auto dirs = unit_directions(f);
  std::vector<std::array<int, kNumParts>> out(dirs.size());
  for (size_t t = 0; t < dirs.size(); ++t)
    for (BodyPart p : kAllParts) out[t][index(p)] = hard_symbol(dirs[t][index(p)], p);
  return out;
}

}  // namespace soskit
