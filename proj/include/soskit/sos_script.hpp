#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "soskit/body_part.hpp"
#include "soskit/error.hpp"
#include "soskit/orientation.hpp"
#include "soskit/quantizer.hpp"
#include "soskit/saliency.hpp"

namespace soskit {

struct SOSEntry {
  BodyPart part = BodyPart::RT;
  int frame = 0;
  int symbol = 0;

  bool operator==(const SOSEntry&) const = default;
};

inline bool entry_less(const SOSEntry& a, const SOSEntry& b) {
  if (a.frame != b.frame) return a.frame < b.frame;
  return index(a.part) < index(b.part);
}

/// Sparse staff: at most one symbol per (part, frame). Entries are kept
/// sorted by frame, then column.
struct SOSScript {
  double fps = 30.0;
  int num_frames = 0;
  std::optional<std::string> text;
  std::vector<SOSEntry> entries;

  bool operator==(const SOSScript&) const = default;
};

inline void validate(const SOSScript& s) {
  if (!(s.fps > 0.0) || !std::isfinite(s.fps)) throw ValidationError("script fps must be positive");
  if (s.num_frames < 1) throw ValidationError("script num_frames must be positive");
  for (size_t i = 0; i < s.entries.size(); ++i) {
    const SOSEntry& e = s.entries[i];
    const std::string where = "entry " + std::to_string(i) + " (" + part_name(e.part) + ", frame " +
                              std::to_string(e.frame) + ")";
    if (e.frame < 0 || e.frame >= s.num_frames)
      throw ValidationError(where + ": frame outside [0, " + std::to_string(s.num_frames) + ")");
    if (!valid_symbol(e.symbol, e.part))
      throw ValidationError(where + ": symbol id " + std::to_string(e.symbol) + " invalid for the part");
    if (i > 0) {
      const SOSEntry& prev = s.entries[i - 1];
      if (prev.frame == e.frame && prev.part == e.part) throw ValidationError(where + ": duplicate (part, frame)");
      if (!entry_less(prev, e)) throw ValidationError(where + ": entries not sorted");
    }
  }
}

inline void sort_entries(SOSScript& s) { std::sort(s.entries.begin(), s.entries.end(), entry_less); }

/// Per part, sorted kept frames.
struct SMSMask {
  std::array<std::vector<int>, kNumParts> kept;
  std::string rule;  // "relative" or "percentile"
  double theta = 0.0;
  std::array<double, kNumParts> percentiles{};

  size_t count() const {
    size_t n = 0;
    for (const auto& k : kept) n += k.size();
    return n;
  }

  bool contains(BodyPart p, int frame) const {
    const auto& k = kept[index(p)];
    return std::binary_search(k.begin(), k.end(), frame);
  }
};

/// Keeps frames with s >= theta * global_max and s > 0.
inline SMSMask sms_mask(const std::array<SaliencyTrack, kNumParts>& tracks, double global_max, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("threshold theta must lie in [0, 1]");
  if (!(global_max >= 0.0)) throw ValidationError("global_max must be non-negative");
  SMSMask mask;
  mask.rule = "relative";
  mask.theta = theta;
  if (global_max == 0.0) return mask;
  const double cut = theta * global_max;
  for (int p = 0; p < kNumParts; ++p) {
    for (size_t f = 0; f < tracks[p].size(); ++f) {
      const double s = tracks[p][f];
      if (s > 0.0 && s >= cut) mask.kept[p].push_back(static_cast<int>(f));
    }
  }
  return mask;
}

/// Linear-interpolated quantile of sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double m) {
  const double pos = m * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

/// Per part, keeps frames whose saliency reaches the m-quantile of that
/// part's positive saliency values.
inline SMSMask sms_mask_percentile(const std::array<SaliencyTrack, kNumParts>& tracks,
                                   const std::array<double, kNumParts>& percentiles) {
  SMSMask mask;
  mask.rule = "percentile";
  mask.percentiles = percentiles;
  for (int p = 0; p < kNumParts; ++p) {
    const double m = percentiles[p];
    if (!(m >= 0.0 && m <= 1.0))
      throw ValidationError("percentile for " + std::string(kPartNames[p]) + " must lie in [0, 1]");
    std::vector<double> positive;
    for (double s : tracks[p])
      if (s > 0.0) positive.push_back(s);
    if (positive.empty()) continue;
    std::sort(positive.begin(), positive.end());
    const double cut = m >= 1.0 ? positive.back() : quantile_sorted(positive, m);
    for (size_t f = 0; f < tracks[p].size(); ++f)
      if (tracks[p][f] > 0.0 && tracks[p][f] >= cut) mask.kept[p].push_back(static_cast<int>(f));
  }
  return mask;
}

/// Draws count independent sets of per-part percentiles m ~ U(0, 1).
inline std::vector<std::array<double, kNumParts>> sample_percentiles(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::array<double, kNumParts>> out(static_cast<size_t>(std::max(count, 0)));
  for (auto& sample : out)
    for (double& m : sample) m = unit(rng);
  return out;
}

struct SynthesisOptions {
  bool include_first_frame = false;  // also place the initial pose symbols
};

inline SOSScript synthesize_sos(const OrientationFeatures& f, const SMSMask& mask, double fps,
                                const SynthesisOptions& options = {}) {
  const auto symbols = hard_quantize(f);
  SOSScript s;
  s.fps = fps;
  s.num_frames = f.num_frames();
  for (BodyPart p : kAllParts) {
    std::vector<int> frames = mask.kept[index(p)];
    if (options.include_first_frame && !frames.empty() && frames.front() != 0) frames.insert(frames.begin(), 0);
    if (options.include_first_frame && frames.empty()) frames.push_back(0);
    for (int frame : frames) {
      if (frame < 0 || frame >= s.num_frames) throw ValidationError("mask frame outside the motion");
      s.entries.push_back({p, frame, symbols[frame][index(p)]});
    }
  }
  sort_entries(s);
  return s;
}

inline nlohmann::ordered_json sos_to_json(const SOSScript& s) {
  nlohmann::ordered_json doc;
  doc["fps"] = s.fps;
  doc["num_frames"] = s.num_frames;
  if (s.text) doc["text"] = *s.text;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const SOSEntry& e : s.entries)
    entries.push_back({{"part", part_name(e.part)}, {"frame", e.frame}, {"symbol", symbol_name(e.symbol, e.part)}});
  doc["entries"] = std::move(entries);
  return doc;
}

inline std::string serialize_sos_json(const SOSScript& s) { return sos_to_json(s).dump(2) + "\n"; }

inline SOSScript sos_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("$: expected an object");
  SOSScript s;
  auto fps = doc.find("fps");
  if (fps == doc.end() || !fps->is_number()) throw ValidationError("$.fps: expected a number");
  s.fps = fps->get<double>();
  auto nf = doc.find("num_frames");
  if (nf == doc.end() || !nf->is_number_integer()) throw ValidationError("$.num_frames: expected an integer");
  s.num_frames = nf->get<int>();
  if (auto text = doc.find("text"); text != doc.end() && !text->is_null()) {
    if (!text->is_string()) throw ValidationError("$.text: expected a string");
    s.text = text->get<std::string>();
  }
  auto entries = doc.find("entries");
  if (entries == doc.end() || !entries->is_array()) throw ValidationError("$.entries: expected an array");
  for (size_t i = 0; i < entries->size(); ++i) {
    const auto& e = (*entries)[i];
    const std::string path = "$.entries[" + std::to_string(i) + "]";
    if (!e.is_object()) throw ValidationError(path + ": expected an object");
    auto part = e.find("part");
    auto frame = e.find("frame");
    auto symbol = e.find("symbol");
    if (part == e.end() || !part->is_string()) throw ValidationError(path + ".part: expected a part name");
    if (frame == e.end() || !frame->is_number_integer()) throw ValidationError(path + ".frame: expected an integer");
    if (symbol == e.end() || !symbol->is_string()) throw ValidationError(path + ".symbol: expected a symbol name");
    SOSEntry entry;
    try {
      entry.part = part_from_name(part->get<std::string>());
      entry.symbol = symbol_id(symbol->get<std::string>(), entry.part);
    } catch (const ValidationError& err) {
      throw ValidationError(path + ": " + err.what());
    }
    entry.frame = frame->get<int>();
    s.entries.push_back(entry);
  }
  sort_entries(s);
  validate(s);
  return s;
}

inline SOSScript parse_sos_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return sos_from_json(doc);
}

/// Everything the extraction pipeline computes for one motion.
struct Extraction {
  OrientationFeatures features;
  SaliencyResult saliency;
  SMSMask mask;
  SOSScript script;
};

inline Extraction extract_sos(const Motion& m, double theta, const SynthesisOptions& options = {}) {
  Extraction x;
  x.features = extract_orientation_features(m);
  x.saliency = saliency_all_parts(x.features);
  x.mask = sms_mask(x.saliency.tracks, x.saliency.global_max, theta);
  x.script = synthesize_sos(x.features, x.mask, m.fps, options);
  return x;
}

inline Extraction extract_sos_percentile(const Motion& m, const std::array<double, kNumParts>& percentiles,
                                         const SynthesisOptions& options = {}) {
  Extraction x;
  x.features = extract_orientation_features(m);
  x.saliency = saliency_all_parts(x.features);
  x.mask = sms_mask_percentile(x.saliency.tracks, percentiles);
  x.script = synthesize_sos(x.features, x.mask, m.fps, options);
  return x;
}

}  // namespace soskit
