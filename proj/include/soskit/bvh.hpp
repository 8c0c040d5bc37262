#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "soskit/error.hpp"
#include "soskit/skeleton.hpp"

namespace soskit {

/// world = axis_map * file. Must be a signed permutation.
using AxisMap = Mat3;

/// Parses "a,b,c" where each item is an optionally negated file axis
/// (x, y or z) feeding world x, y, z. "-x,z,y" maps y-up files to z-up.
inline AxisMap parse_axis_map(std::string_view spec) {
  AxisMap m = AxisMap::Zero();
  std::array<bool, 3> used{};
  int row = 0;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string item;
    for (char c : spec.substr(pos, comma - pos))
      if (!std::isspace(static_cast<unsigned char>(c))) item += static_cast<char>(std::tolower(c));
    double sign = 1.0;
    if (!item.empty() && (item[0] == '-' || item[0] == '+')) {
      sign = item[0] == '-' ? -1.0 : 1.0;
      item.erase(0, 1);
    }
    if (row >= 3 || item.size() != 1 || item[0] < 'x' || item[0] > 'z')
      throw ValidationError("invalid axis map '" + std::string(spec) + "'");
    const int col = item[0] - 'x';
    if (used[col]) throw ValidationError("axis map '" + std::string(spec) + "' repeats an axis");
    used[col] = true;
    m(row++, col) = sign;
    pos = comma + 1;
  }
  if (row != 3) throw ValidationError("axis map '" + std::string(spec) + "' needs three axes");
  return m;
}

inline const char* kDefaultAxisMap = "-x,z,y";

struct BvhOptions {
  double scale = 1.0;  // meters per file unit
  AxisMap axis_map = parse_axis_map(kDefaultAxisMap);
  std::map<std::string, std::string> roles;  // role -> joint name overrides
  bool require_roles = true;                  // false: kinematic-only skeleton
};

namespace detail {

inline std::string normalize_joint_name(std::string_view name) {
  if (auto colon = name.rfind(':'); colon != std::string_view::npos) name = name.substr(colon + 1);
  std::string out;
  for (char c : name)
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(c));
  return out;
}

inline const std::map<Role, std::vector<std::string>>& role_candidates() {
  static const std::map<Role, std::vector<std::string>> table = {
      {Role::LeftShoulder, {"leftarm", "leftupperarm", "lupperarm", "lshldr", "leftshoulder", "lshoulder", "lhumerus"}},
      {Role::RightShoulder, {"rightarm", "rightupperarm", "rupperarm", "rshldr", "rightshoulder", "rshoulder", "rhumerus"}},
      {Role::LeftWrist, {"lefthand", "leftwrist", "lwrist", "lhand"}},
      {Role::RightWrist, {"righthand", "rightwrist", "rwrist", "rhand"}},
      {Role::LeftHip, {"leftupleg", "leftthigh", "lthigh", "lefthip", "lhip", "lfemur"}},
      {Role::RightHip, {"rightupleg", "rightthigh", "rthigh", "righthip", "rhip", "rfemur"}},
      {Role::LeftAnkle, {"leftfoot", "leftankle", "lankle", "lfoot"}},
      {Role::RightAnkle, {"rightfoot", "rightankle", "rankle", "rfoot"}},
      {Role::Pelvis, {"hips", "pelvis", "hip", "root"}},
      {Role::Head, {"head"}},
  };
  return table;
}

struct Token {
  std::string text;
  int line;
};

struct BvhJoint {
  Joint joint;
  std::vector<std::string> channels;
  int line = 0;
};

class HierarchyReader {
 public:
  HierarchyReader(const std::vector<Token>& tokens, size_t pos) : tokens_(tokens), pos_(pos) {}

  size_t position() const { return pos_; }

  const Token& next(std::string_view what) {
    if (pos_ >= tokens_.size())
      throw ParseError("unexpected end of file, expected " + std::string(what),
                       tokens_.empty() ? 0 : tokens_.back().line);
    return tokens_[pos_++];
  }

  const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

  void expect(std::string_view word) {
    const Token& t = next(word);
    if (t.text != word) throw ParseError("expected '" + std::string(word) + "', found '" + t.text + "'", t.line);
  }

  double number() {
    const Token& t = next("number");
    try {
      size_t used = 0;
      double v = std::stod(t.text, &used);
      if (used != t.text.size()) throw std::invalid_argument(t.text);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected a number, found '" + t.text + "'", t.line);
    }
  }

  void read_joint(std::vector<BvhJoint>& out, int parent, std::string name, int line) {
    BvhJoint j;
    j.joint.name = std::move(name);
    j.joint.parent = parent;
    j.line = line;
    expect("{");
    expect("OFFSET");
    for (int k = 0; k < 3; ++k) j.joint.offset[k] = number();
    const Token& ch = next("CHANNELS");
    if (ch.text != "CHANNELS") throw ParseError("expected 'CHANNELS', found '" + ch.text + "'", ch.line);
    const Token& count_tok = next("channel count");
    int count = 0;
    try {
      count = std::stoi(count_tok.text);
    } catch (const std::exception&) {
      throw ParseError("bad channel count '" + count_tok.text + "'", count_tok.line);
    }
    if (count < 0 || count > 6) throw ParseError("channel count must be 0..6", count_tok.line);
    for (int k = 0; k < count; ++k) {
      const Token& c = next("channel name");
      static const std::vector<std::string> valid = {"Xposition", "Yposition", "Zposition",
                                                     "Xrotation", "Yrotation", "Zrotation"};
      if (std::find(valid.begin(), valid.end(), c.text) == valid.end())
        throw ParseError("unknown channel '" + c.text + "'", c.line);
      if (parent >= 0 && c.text.find("position") != std::string::npos)
        throw ParseError("position channels are only supported on the root joint", c.line);
      j.channels.push_back(c.text);
    }
    const int index = static_cast<int>(out.size());
    out.push_back(std::move(j));
    for (;;) {
      const Token& t = next("'}'");
      if (t.text == "}") return;
      if (t.text == "JOINT") {
        const Token& n = next("joint name");
        read_joint(out, index, n.text, n.line);
      } else if (t.text == "End") {
        expect("Site");
        expect("{");
        expect("OFFSET");
        BvhJoint end;
        end.joint.name = out[index].joint.name + "_end";
        end.joint.parent = index;
        end.line = t.line;
        for (int k = 0; k < 3; ++k) end.joint.offset[k] = number();
        expect("}");
        out.push_back(std::move(end));
      } else {
        throw ParseError("unexpected '" + t.text + "' in joint '" + out[index].joint.name + "'", t.line);
      }
    }
  }

 private:
  const std::vector<Token>& tokens_;
  size_t pos_;
};

inline Mat3 axis_rotation(char axis, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const Vec3 a = axis == 'X' ? Vec3::UnitX() : axis == 'Y' ? Vec3::UnitY() : Vec3::UnitZ();
  return Eigen::AngleAxisd(rad, a).toRotationMatrix();
}

}  // namespace detail

/// Assigns the ten roles from common joint naming conventions (CMU,
/// Mixamo, Biovision), honoring explicit overrides first.
inline std::map<std::string, std::string> guess_roles(const std::vector<Joint>& joints,
                                                      const std::map<std::string, std::string>& overrides = {}) {
  std::map<std::string, std::string> out = overrides;
  std::vector<std::string> missing;
  for (const auto& [role, names] : detail::role_candidates()) {
    const std::string rname = role_name(role);
    if (out.count(rname)) continue;
    bool found = false;
    for (const std::string& candidate : names) {
      for (const Joint& j : joints) {
        if (detail::normalize_joint_name(j.name) == candidate) {
          out[rname] = j.name;
          found = true;
          break;
        }
      }
      if (found) break;
    }
    if (!found) missing.push_back(rname);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("could not resolve roles from joint names: " + list);
  }
  return out;
}

inline Motion parse_bvh(std::string_view text, const BvhOptions& options = {}) {
  using detail::Token;
  std::vector<Token> tokens;
  std::vector<std::pair<int, std::string>> lines;  // (line number, text) after "Frame Time"
  {
    int line_no = 0;
    size_t start = 0;
    bool in_motion_rows = false;
    while (start <= text.size()) {
      size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      ++line_no;
      if (in_motion_rows) {
        lines.emplace_back(line_no, std::string(line));
      } else {
        std::istringstream ss{std::string(line)};
        std::string word;
        while (ss >> word) tokens.push_back({word, line_no});
        if (line.find("Frame Time") != std::string_view::npos) in_motion_rows = true;
      }
      if (end == text.size()) break;
      start = end + 1;
    }
  }

  detail::HierarchyReader reader(tokens, 0);
  reader.expect("HIERARCHY");
  reader.expect("ROOT");
  std::vector<detail::BvhJoint> bjoints;
  {
    const Token& n = reader.next("root name");
    reader.read_joint(bjoints, -1, n.text, n.line);
  }
  reader.expect("MOTION");
  const Token& frames_kw = reader.next("'Frames:'");
  if (frames_kw.text != "Frames:") throw ParseError("expected 'Frames:', found '" + frames_kw.text + "'", frames_kw.line);
  const Token& count_tok = reader.next("frame count");
  long frame_count = 0;
  try {
    size_t used = 0;
    frame_count = std::stol(count_tok.text, &used);
    if (used != count_tok.text.size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw ParseError("bad frame count '" + count_tok.text + "'", count_tok.line);
  }
  reader.expect("Frame");
  const Token& time_kw = reader.next("'Time:'");
  if (time_kw.text != "Time:") throw ParseError("expected 'Time:', found '" + time_kw.text + "'", time_kw.line);
  const int time_line = time_kw.line;
  const double frame_time = reader.number();
  if (!(frame_time > 0.0) || !std::isfinite(frame_time))
    throw ParseError("frame time must be positive", time_line);
  if (reader.peek()) throw ParseError("unexpected '" + reader.peek()->text + "' after frame time", reader.peek()->line);

  size_t total_channels = 0;
  for (const auto& j : bjoints) total_channels += j.channels.size();

  const Mat3& axis = options.axis_map;
  std::vector<Joint> joints;
  joints.reserve(bjoints.size());
  for (const auto& bj : bjoints) {
    Joint j = bj.joint;
    j.offset = axis * j.offset * options.scale;
    joints.push_back(std::move(j));
  }

  Motion m;
  m.fps = 1.0 / frame_time;
  if (options.require_roles) {
    m.skeleton = make_skeleton(joints, guess_roles(joints, options.roles));
  } else {
    m.skeleton.joints = joints;
    validate(m.skeleton, false);
  }

  long row_count = 0;
  int last_line = time_line;
  for (const auto& [line_no, line] : lines) {
    last_line = line_no;
    std::istringstream ss(line);
    std::vector<double> values;
    std::string word;
    while (ss >> word) {
      try {
        size_t used = 0;
        values.push_back(std::stod(word, &used));
        if (used != word.size()) throw std::invalid_argument(word);
      } catch (const std::exception&) {
        throw ParseError("bad motion value '" + word + "'", line_no);
      }
    }
    if (values.empty()) continue;
    ++row_count;
    if (row_count > frame_count)
      throw ParseError("more motion rows than the declared " + std::to_string(frame_count) + " frames", line_no);
    if (values.size() != total_channels)
      throw ParseError("motion row has " + std::to_string(values.size()) + " values, hierarchy declares " +
                           std::to_string(total_channels) + " channels",
                       line_no);
    Pose pose;
    pose.rotations.resize(bjoints.size(), Quat::Identity());
    size_t k = 0;
    for (size_t ji = 0; ji < bjoints.size(); ++ji) {
      Mat3 r = Mat3::Identity();
      Vec3 t = Vec3::Zero();
      for (const std::string& ch : bjoints[ji].channels) {
        const double v = values[k++];
        const int axis_index = ch[0] - 'X';
        if (ch.find("rotation") != std::string::npos) {
          r = r * detail::axis_rotation(ch[0], v);
        } else {
          t[axis_index] = v;
        }
      }
      pose.rotations[ji] = Quat(axis * r * axis.transpose()).normalized();
      if (ji == 0) pose.root_translation = axis * t * options.scale;
    }
    m.frames.push_back(std::move(pose));
  }
  if (row_count != frame_count)
    throw ParseError("declared " + std::to_string(frame_count) + " frames but found " + std::to_string(row_count) +
                         " motion rows",
                     last_line);
  validate(m, options.require_roles);
  return m;
}

}  // namespace soskit
