#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "soskit/quantizer.hpp"
#include "soskit/sos_script.hpp"

namespace soskit {

struct StaffOptions {
  double pixels_per_frame = 6.0;
  double column_width = 40.0;
  double glyph_size = 14.0;
  double margin = 30.0;
};

namespace detail {

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string xml_escape(std::string_view in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct PathBuilder {
  double scale;
  std::string d;

  void poly(std::initializer_list<Eigen::Vector2d> pts) {
    bool first = true;
    for (const auto& p : pts) {
      d += first ? "M" : " L";
      d += fmt2(p.x() * scale) + " " + fmt2(p.y() * scale);
      first = false;
    }
    d += " Z ";
  }
};

// Page coordinates: +x right, +y down; forward points up the page.
inline Eigen::Vector2d page_direction(int dir) {
  const Vec3 h = horizontal_direction(dir);
  return {h.x(), -h.y()};
}

}  // namespace detail

/// Path data for one symbol, centred on the origin. Limb symbols are a
/// block with a pointer toward the direction plus a level mark; Place
/// symbols have no pointer; root symbols are arrows.
inline std::string glyph_path(int symbol, BodyPart part, double size) {
  using V = Eigen::Vector2d;
  detail::PathBuilder b{size / 2.0, {}};
  if (is_root(part)) {
    const V d = detail::page_direction(symbol);
    const V n{-d.y(), d.x()};
    b.poly({-0.9 * d + 0.15 * n, 0.25 * d + 0.15 * n, 0.25 * d + 0.6 * n, 1.0 * d, 0.25 * d - 0.6 * n,
            0.25 * d - 0.15 * n, -0.9 * d - 0.15 * n});
  } else {
    b.poly({V(-1, -1), V(1, -1), V(1, 1), V(-1, 1)});
    Level level;
    if (symbol == kPlaceLow || symbol == kPlaceHigh) {
      level = symbol == kPlaceLow ? Level::Low : Level::Top;
    } else {
      level = static_cast<Level>(symbol / kNumDirections);
      const V d = detail::page_direction(symbol % kNumDirections);
      const V n{-d.y(), d.x()};
      b.poly({0.9 * d + 0.55 * n, 1.8 * d, 0.9 * d - 0.55 * n});
    }
    switch (level) {
      case Level::Low: b.poly({V(-0.6, 0.55), V(0.6, 0.55), V(0.6, 0.75), V(-0.6, 0.75)}); break;
      case Level::Middle: b.poly({V(0, -0.3), V(0.3, 0), V(0, 0.3), V(-0.3, 0)}); break;
      case Level::Top: b.poly({V(-0.6, -0.75), V(0.6, -0.75), V(0.6, -0.55), V(-0.6, -0.55)}); break;
    }
  }
  if (!b.d.empty() && b.d.back() == ' ') b.d.pop_back();
  return b.d;
}

inline std::string glyph_fill(int symbol, BodyPart part) {
  if (is_root(part)) return "#000000";
  if (symbol == kPlaceLow) return "#333333";
  if (symbol == kPlaceHigh) return "#e8e8e8";
  switch (static_cast<Level>(symbol / kNumDirections)) {
    case Level::Low: return "#333333";
    case Level::Middle: return "url(#hatch)";
    case Level::Top: return "#e8e8e8";
  }
  return "#000000";
}

/// Vertical staff, frame 0 at the bottom, one column per body part.
inline std::string render_staff_svg(const SOSScript& s, const StaffOptions& opt = {}) {
  using detail::fmt2;
  const int frames = std::max(s.num_frames, 1);
  const double staff_h = (frames - 1) * opt.pixels_per_frame + opt.glyph_size;
  const double width = 2 * opt.margin + kNumParts * opt.column_width;
  const double height = 2 * opt.margin + staff_h + 20.0;
  const double top = opt.margin;
  const double bottom = top + staff_h;
  auto frame_y = [&](int f) { return top + (frames - 1 - f) * opt.pixels_per_frame + opt.glyph_size / 2; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt2(width) + "\" height=\"" +
         fmt2(height) + "\" viewBox=\"0 0 " + fmt2(width) + " " + fmt2(height) + "\">\n";
  out += "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"4\" height=\"4\">"
         "<rect width=\"4\" height=\"4\" fill=\"#ffffff\"/>"
         "<path d=\"M0 4 L4 0\" stroke=\"#000000\" stroke-width=\"1\"/></pattern></defs>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(width) + "\" height=\"" + fmt2(height) + "\" fill=\"#ffffff\"/>\n";
  if (s.text) {
    out += "<text x=\"" + fmt2(opt.margin) + "\" y=\"" + fmt2(opt.margin / 2 + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::xml_escape(*s.text) + "</text>\n";
  }
  out += "<g class=\"staff\" stroke=\"#000000\" stroke-width=\"1\">\n";
  for (int c = 0; c <= kNumParts; ++c) {
    const double x = opt.margin + c * opt.column_width;
    out += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(x) + "\" y2=\"" + fmt2(bottom) +
           "\"/>\n";
  }
  out += "<line x1=\"" + fmt2(opt.margin) + "\" y1=\"" + fmt2(bottom) + "\" x2=\"" +
         fmt2(opt.margin + kNumParts * opt.column_width) + "\" y2=\"" + fmt2(bottom) + "\"/>\n";
  const int tick = std::max(1, static_cast<int>(std::lround(s.fps)));
  for (int f = 0; f < frames; f += tick) {
    const double y = frame_y(f);
    out += "<line x1=\"" + fmt2(opt.margin - 5) + "\" y1=\"" + fmt2(y) + "\" x2=\"" + fmt2(opt.margin) +
           "\" y2=\"" + fmt2(y) + "\"/>\n";
  }
  out += "</g>\n<g class=\"labels\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">\n";
  for (int c = 0; c < kNumParts; ++c) {
    const double x = opt.margin + (c + 0.5) * opt.column_width;
    out += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(bottom + 14) + "\">" + std::string(kPartNames[c]) + "</text>\n";
  }
  for (int f = 0; f < frames; f += tick) {
    out += "<text x=\"" + fmt2(opt.margin - 14) + "\" y=\"" + fmt2(frame_y(f) + 3) + "\">" + std::to_string(f) +
           "</text>\n";
  }
  out += "</g>\n<g class=\"glyphs\" stroke=\"#000000\" stroke-width=\"0.8\" fill-rule=\"evenodd\">\n";
  for (const SOSEntry& e : s.entries) {
    const double x = opt.margin + (index(e.part) + 0.5) * opt.column_width;
    const double y = frame_y(e.frame);
    out += "<path data-part=\"" + part_name(e.part) + "\" data-frame=\"" + std::to_string(e.frame) +
           "\" data-symbol=\"" + symbol_name(e.symbol, e.part) + "\" transform=\"translate(" + fmt2(x) + "," +
           fmt2(y) + ")\" fill=\"" + glyph_fill(e.symbol, e.part) + "\" d=\"" + glyph_path(e.symbol, e.part, opt.glyph_size) +
           "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace soskit
