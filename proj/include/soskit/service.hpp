#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "soskit/bvh.hpp"
#include "soskit/error.hpp"
#include "soskit/motion_json.hpp"
#include "soskit/optimizer.hpp"
#include "soskit/sos_script.hpp"
#include "soskit/staff_svg.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a _res macro.
#include <httplib.h>

namespace soskit::service {

using ordered_json = nlohmann::ordered_json;

struct Config {
  std::string bind = "127.0.0.1";
  int port = 7878;
  double theta = 0.7;
  double beta = 10.0;
  int max_iters = 100;
  int max_iters_cap = 1000;
  std::string mode = "direct";
  std::string axis_map = kDefaultAxisMap;
  double bvh_scale = 0.01;  // BVH files are usually in centimetres
  int max_frames = 2000;
  std::string data_dir;  // empty: file references disabled
};

inline void validate(const Config& c) {
  if (c.port < 1 || c.port > 65535) throw ValidationError("port must lie in [1, 65535]");
  if (!(c.theta >= 0.0 && c.theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
  if (!(c.beta > 0.0)) throw ValidationError("beta must be positive");
  if (c.max_iters < 0 || c.max_iters_cap < 0) throw ValidationError("iteration limits must be non-negative");
  if (!(c.bvh_scale > 0.0)) throw ValidationError("BVH scale must be positive");
  if (c.max_frames < 2) throw ValidationError("max_frames must be at least 2");
  mode_from_name(c.mode);
  parse_axis_map(c.axis_map);
}

/// Error carrying an HTTP status and the JSON path of the offending field.
class RequestError : public std::runtime_error {
 public:
  RequestError(int status, std::string path, const std::string& message)
      : std::runtime_error(message), status_(status), path_(std::move(path)) {}
  int status() const { return status_; }
  const std::string& path() const { return path_; }

 private:
  int status_;
  std::string path_;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// ---------------------------------------------------------------------------
// Motion loading shared with the CLI

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline BvhOptions bvh_options(const Config& c) {
  BvhOptions o;
  o.scale = c.bvh_scale;
  o.axis_map = parse_axis_map(c.axis_map);
  return o;
}

/// Reads a .bvh or motion .json file.
inline Motion load_motion_file(const std::filesystem::path& path, const Config& c) {
  const std::string text = read_file(path);
  std::string ext = path.extension().string();
  for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".bvh" ? parse_bvh(text, bvh_options(c)) : parse_motion_json(text);
}

namespace detail {

inline std::string nest_path(const std::string& prefix, const std::string& message) {
  // Library errors report paths relative to their own document ("$.fps: ...").
  if (message.rfind("$", 0) == 0) return prefix + message.substr(1);
  return message;
}

inline std::string path_of(const std::string& message) {
  if (message.rfind("$", 0) != 0) return "$";
  const auto colon = message.find(':');
  return colon == std::string::npos ? message : message.substr(0, colon);
}

inline RequestError bad_request(const std::string& prefix, const std::exception& e) {
  const std::string msg = nest_path(prefix, e.what());
  return RequestError(400, msg.rfind("$", 0) == 0 ? path_of(msg) : prefix, msg);
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& path, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw RequestError(400, path + "." + key, path + "." + key + ": expected a number");
  return it->get<double>();
}

inline int int_field(const nlohmann::json& obj, const char* key, const std::string& path, int fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number_integer()) throw RequestError(400, path + "." + key, path + "." + key + ": expected an integer");
  return it->get<int>();
}

inline const nlohmann::json* object_field(const nlohmann::json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  if (!it->is_object()) throw RequestError(400, path + "." + key, path + "." + key + ": expected an object");
  return &*it;
}

inline std::filesystem::path resolve_data_path(const Config& c, const std::string& relative) {
  namespace fs = std::filesystem;
  if (c.data_dir.empty())
    throw RequestError(400, "$.motion_path", "$.motion_path: file references are disabled (no data directory)");
  const fs::path root = fs::weakly_canonical(fs::path(c.data_dir));
  const fs::path full = fs::weakly_canonical(root / relative);
  auto [r, f] = std::mismatch(root.begin(), root.end(), full.begin(), full.end());
  if (r != root.end()) throw RequestError(400, "$.motion_path", "$.motion_path: outside the data directory");
  if (!fs::is_regular_file(full)) throw RequestError(400, "$.motion_path", "$.motion_path: no such file");
  return full;
}

inline Motion request_motion(const nlohmann::json& body, const Config& c) {
  Motion m;
  auto inline_motion = body.find("motion");
  auto path = body.find("motion_path");
  if (inline_motion != body.end() && !inline_motion->is_null()) {
    try {
      m = motion_from_json(*inline_motion);
    } catch (const std::exception& e) {
      throw bad_request("$.motion", e);
    }
  } else if (path != body.end() && !path->is_null()) {
    if (!path->is_string()) throw RequestError(400, "$.motion_path", "$.motion_path: expected a string");
    const auto full = resolve_data_path(c, path->get<std::string>());
    try {
      m = load_motion_file(full, c);
    } catch (const ParseError& e) {
      throw RequestError(400, "$.motion_path", "$.motion_path: " + std::string(e.what()));
    } catch (const ValidationError& e) {
      throw RequestError(400, "$.motion_path", "$.motion_path: " + std::string(e.what()));
    }
  } else {
    throw RequestError(400, "$.motion", "$.motion: required (inline motion or motion_path)");
  }
  if (m.num_frames() > c.max_frames)
    throw RequestError(413, "$.motion.frames",
                       "motion has " + std::to_string(m.num_frames()) + " frames, limit is " +
                           std::to_string(c.max_frames));
  if (!m.skeleton.has_roles()) throw RequestError(400, "$.motion.roles", "$.motion.roles: all ten roles are required");
  return m;
}

inline SOSScript request_sos(const nlohmann::json& body) {
  auto it = body.find("sos");
  if (it == body.end() || it->is_null()) throw RequestError(400, "$.sos", "$.sos: required");
  try {
    return sos_from_json(*it);
  } catch (const std::exception& e) {
    throw bad_request("$.sos", e);
  }
}

inline ordered_json symbols_json(const std::vector<std::array<int, kNumParts>>& ids) {
  ordered_json out = ordered_json::array();
  for (const auto& row : ids) out.push_back(row);
  return out;
}

inline ordered_json template_table(BodyPart part) {
  ordered_json rows = ordered_json::array();
  const auto u = templates().for_part(part);
  for (int id = 0; id < num_symbols(part); ++id)
    rows.push_back({{"id", id}, {"name", symbol_name(id, part)}, {"vector", {u[id].x(), u[id].y(), u[id].z()}}});
  return rows;
}

inline nlohmann::json parse_body(const std::string& text) {
  try {
    nlohmann::json body = nlohmann::json::parse(text);
    if (!body.is_object()) throw RequestError(400, "$", "$: expected a JSON object");
    return body;
  } catch (const nlohmann::json::parse_error& e) {
    throw RequestError(400, "$", std::string("invalid JSON: ") + e.what());
  }
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::array<double, kNumParts> percentiles_field(const nlohmann::json& v) {
  std::array<double, kNumParts> m{};
  if (v.is_array()) {
    if (v.size() != kNumParts) throw RequestError(400, "$.percentiles", "$.percentiles: expected 6 values");
    for (int p = 0; p < kNumParts; ++p) {
      if (!v[p].is_number())
        throw RequestError(400, "$.percentiles[" + std::to_string(p) + "]", "$.percentiles: expected numbers");
      m[p] = v[p].get<double>();
    }
  } else if (v.is_object()) {
    for (int p = 0; p < kNumParts; ++p) {
      const std::string path = "$.percentiles." + std::string(kPartNames[p]);
      auto it = v.find(std::string(kPartNames[p]));
      if (it == v.end() || !it->is_number()) throw RequestError(400, path, path + ": expected a number");
      m[p] = it->get<double>();
    }
  } else {
    throw RequestError(400, "$.percentiles", "$.percentiles: expected an array or an object keyed by part");
  }
  for (int p = 0; p < kNumParts; ++p)
    if (!(m[p] >= 0.0 && m[p] <= 1.0))
      throw RequestError(400, "$.percentiles", "$.percentiles: values must lie in [0, 1]");
  return m;
}

inline ordered_json json_response_body(ordered_json payload, const ordered_json& params, const Timer& timer,
                                       const std::vector<std::string>& warnings) {
  payload["params"] = params;
  payload["timing_ms"] = timer.ms();
  payload["warnings"] = warnings;
  return payload;
}

inline Response json_ok(const ordered_json& payload) { return {200, "application/json", payload.dump()}; }

}  // namespace detail

inline Response error_response(int status, const std::string& path, const std::string& message) {
  return {status, "application/json", ordered_json{{"error", message}, {"path", path}}.dump()};
}

/// Runs a handler body, mapping failures to error responses.
template <class F>
Response guarded(F&& body) {
  try {
    return body();
  } catch (const RequestError& e) {
    return error_response(e.status(), e.path(), e.what());
  } catch (const ValidationError& e) {
    return error_response(400, detail::path_of(e.what()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "$", e.what());
  }
}

// ---------------------------------------------------------------------------
// Endpoint handlers. Each is a pure function of its request body.

inline Response extract_impl(const Config& c, const std::string& text) {
  detail::Timer timer;
  const nlohmann::json body = detail::parse_body(text);
  const Motion m = detail::request_motion(body, c);
  std::vector<std::string> warnings;
  ordered_json params;

  Extraction x;
  auto pct = body.find("percentiles");
  const bool has_theta = body.contains("theta") && !body["theta"].is_null();
  if (pct != body.end() && !pct->is_null()) {
    if (has_theta) throw RequestError(400, "$.percentiles", "$.percentiles: give either theta or percentiles");
    const auto m_parts = detail::percentiles_field(*pct);
    x = extract_sos_percentile(m, m_parts);
    params["rule"] = "percentile";
    ordered_json by_part;
    for (int p = 0; p < kNumParts; ++p) by_part[std::string(kPartNames[p])] = m_parts[p];
    params["percentiles"] = by_part;
  } else {
    const double theta = detail::number_field(body, "theta", "$", c.theta);
    if (!(theta >= 0.0 && theta <= 1.0)) throw RequestError(400, "$.theta", "$.theta: must lie in [0, 1]");
    x = extract_sos(m, theta);
    params["rule"] = "relative";
    params["theta"] = theta;
  }
  if (auto t = body.find("text"); t != body.end() && !t->is_null()) {
    if (!t->is_string()) throw RequestError(400, "$.text", "$.text: expected a string");
    x.script.text = t->get<std::string>();
  }

  if (x.saliency.global_max == 0.0) warnings.push_back("saliency is zero everywhere; the script is empty");
  int held = 0;
  for (const auto& row : x.features.degenerate)
    for (bool d : row) held += d;
  if (held > 0) warnings.push_back(std::to_string(held) + " degenerate feature samples held the previous direction");

  ordered_json saliency;
  for (int p = 0; p < kNumParts; ++p) saliency[std::string(kPartNames[p])] = x.saliency.tracks[p];
  ordered_json payload;
  payload["sos"] = sos_to_json(x.script);
  payload["saliency"] = saliency;
  payload["global_max"] = x.saliency.global_max;
  payload["dense_symbols"] = detail::symbols_json(hard_quantize(x.features));
  return detail::json_ok(detail::json_response_body(std::move(payload), params, timer, warnings));
}

inline StaffOptions staff_options(const nlohmann::json* opt) {
  StaffOptions o;
  if (!opt) return o;
  o.pixels_per_frame = detail::number_field(*opt, "pixels_per_frame", "$.options", o.pixels_per_frame);
  o.column_width = detail::number_field(*opt, "column_width", "$.options", o.column_width);
  o.glyph_size = detail::number_field(*opt, "glyph_size", "$.options", o.glyph_size);
  o.margin = detail::number_field(*opt, "margin", "$.options", o.margin);
  if (!(o.pixels_per_frame > 0 && o.column_width > 0 && o.glyph_size > 0 && o.margin >= 0))
    throw RequestError(400, "$.options", "$.options: sizes must be positive");
  return o;
}

inline Response render_impl(const Config&, const std::string& text) {
  const nlohmann::json body = detail::parse_body(text);
  const SOSScript s = detail::request_sos(body);
  const StaffOptions o = staff_options(detail::object_field(body, "options", "$"));
  return {200, "image/svg+xml", render_staff_svg(s, o)};
}

inline Response optimize_impl(const Config& c, const std::string& text) {
  detail::Timer timer;
  const nlohmann::json body = detail::parse_body(text);
  const Motion m = detail::request_motion(body, c);
  const SOSScript s = detail::request_sos(body);
  if (s.num_frames != m.num_frames())
    throw RequestError(422, "$.sos.num_frames",
                       "script has " + std::to_string(s.num_frames) + " frames, motion has " +
                           std::to_string(m.num_frames()));
  std::vector<std::string> warnings;

  OptimizationProblem p;
  p.initial = m;
  p.target = s;
  p.beta = c.beta;
  p.max_iters = c.max_iters;
  p.mode = mode_from_name(c.mode);
  if (const nlohmann::json* opt = detail::object_field(body, "options", "$")) {
    p.max_iters = detail::int_field(*opt, "iters", "$.options", p.max_iters);
    p.beta = detail::number_field(*opt, "beta", "$.options", p.beta);
    p.weights.step_weight = detail::number_field(*opt, "step_weight", "$.options", p.weights.step_weight);
    p.weights.lambda_smooth = detail::number_field(*opt, "lambda_smooth", "$.options", p.weights.lambda_smooth);
    p.weights.lambda_init = detail::number_field(*opt, "lambda_init", "$.options", p.weights.lambda_init);
    p.tolerance = detail::number_field(*opt, "tolerance", "$.options", p.tolerance);
    p.harmonics = detail::int_field(*opt, "harmonics", "$.options", p.harmonics);
    if (auto mode = opt->find("mode"); mode != opt->end() && !mode->is_null()) {
      if (!mode->is_string()) throw RequestError(400, "$.options.mode", "$.options.mode: expected a string");
      try {
        p.mode = mode_from_name(mode->get<std::string>());
      } catch (const ValidationError& e) {
        throw RequestError(400, "$.options.mode", "$.options.mode: " + std::string(e.what()));
      }
    }
  }
  if (p.max_iters < 0) throw RequestError(400, "$.options.iters", "$.options.iters: must be non-negative");
  const int cap = std::min(c.max_iters_cap, 1000);
  if (p.max_iters > cap) {
    warnings.push_back("iters reduced from " + std::to_string(p.max_iters) + " to the server cap " +
                       std::to_string(cap));
    p.max_iters = cap;
  }

  OptimizationResult r;
  try {
    r = optimize(p);
  } catch (const ValidationError& e) {
    throw RequestError(400, "$.options", e.what());
  }
  if (!r.converged) warnings.push_back("not every script entry is satisfied");

  ordered_json params{{"iters", p.max_iters},
                      {"mode", mode_name(p.mode)},
                      {"beta", p.beta},
                      {"step_weight", p.weights.step_weight},
                      {"lambda_smooth", p.weights.lambda_smooth},
                      {"lambda_init", p.weights.lambda_init},
                      {"tolerance", p.tolerance},
                      {"harmonics", p.harmonics}};
  ordered_json payload;
  payload["motion"] = motion_to_json(r.motion);
  payload["sos_acc"] = r.sos_acc;
  payload["l2_rot6d"] = r.l2_rot6d;
  payload["loss_trace"] = r.loss_trace;
  payload["converged"] = r.converged;
  payload["iterations"] = r.iterations;
  return detail::json_ok(detail::json_response_body(std::move(payload), params, timer, warnings));
}

inline Response quantize_impl(const Config& c, const std::string& text) {
  detail::Timer timer;
  const nlohmann::json body = detail::parse_body(text);
  const Motion m = detail::request_motion(body, c);
  const double beta = detail::number_field(body, "beta", "$", c.beta);
  if (!(beta > 0.0)) throw RequestError(400, "$.beta", "$.beta: must be positive");
  const QuantizedFeatures q = soft_quantize(extract_orientation_features(m), beta);
  ordered_json names = ordered_json::array();
  ordered_json soft = ordered_json::array();
  for (size_t t = 0; t < q.hard_ids.size(); ++t) {
    ordered_json row = ordered_json::array();
    ordered_json vecs = ordered_json::array();
    for (BodyPart p : kAllParts) {
      row.push_back(symbol_name(q.hard_ids[t][index(p)], p));
      const Vec3& v = q.q[t][index(p)];
      vecs.push_back({v.x(), v.y(), v.z()});
    }
    names.push_back(std::move(row));
    soft.push_back(std::move(vecs));
  }
  ordered_json payload;
  payload["parts"] = kPartNames;
  payload["symbols"] = detail::symbols_json(q.hard_ids);
  payload["names"] = std::move(names);
  payload["soft"] = std::move(soft);
  return detail::json_ok(detail::json_response_body(std::move(payload), {{"beta", beta}}, timer, {}));
}

inline Response handle_symbols() {
  ordered_json payload;
  payload["parts"] = kPartNames;
  payload["limb"] = detail::template_table(BodyPart::LA);
  payload["root"] = detail::template_table(BodyPart::RT);
  return detail::json_ok(payload);
}

inline Response handle_health() { return detail::json_ok({{"status", "ok"}}); }

inline Response handle_extract(const Config& c, const std::string& body) {
  return guarded([&] { return extract_impl(c, body); });
}
inline Response handle_render(const Config& c, const std::string& body) {
  return guarded([&] { return render_impl(c, body); });
}
inline Response handle_optimize(const Config& c, const std::string& body) {
  return guarded([&] { return optimize_impl(c, body); });
}
inline Response handle_quantize(const Config& c, const std::string& body) {
  return guarded([&] { return quantize_impl(c, body); });
}

/// Routes one request; never throws.
inline Response dispatch(const Config& c, const std::string& method, const std::string& path, const std::string& body) {
  if (method == "GET" && path == "/v1/health") return handle_health();
  if (method == "GET" && path == "/v1/symbols") return handle_symbols();
  if (method == "POST" && path == "/v1/extract") return handle_extract(c, body);
  if (method == "POST" && path == "/v1/render") return handle_render(c, body);
  if (method == "POST" && path == "/v1/optimize") return handle_optimize(c, body);
  if (method == "POST" && path == "/v1/quantize") return handle_quantize(c, body);
  return error_response(404, "$", "no route for " + method + " " + path);
}

/// httplib server with every route bound to dispatch().
inline std::unique_ptr<httplib::Server> make_server(const Config& c) {
  auto server = std::make_unique<httplib::Server>();
  server->set_payload_max_length(256u << 20);
  server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                               {"Access-Control-Allow-Headers", "Content-Type"},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto handler = [c](const httplib::Request& req, httplib::Response& res) {
    const Response r = dispatch(c, req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  for (const char* route : {"/v1/health", "/v1/symbols"}) server->Get(route, handler);
  for (const char* route : {"/v1/extract", "/v1/render", "/v1/optimize", "/v1/quantize"}) server->Post(route, handler);
  server->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  return server;
}

}  // namespace soskit::service
