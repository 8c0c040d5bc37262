// soskit command-line tool: extract, optimize, metrics, augment, render, serve.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "soskit/soskit.hpp"

namespace fs = std::filesystem;
using namespace soskit;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

SOSScript load_sos(const std::string& path) { return parse_sos_json(service::read_file(path)); }

void keep_parts(SOSScript& s, const std::vector<std::string>& parts) {
  if (parts.empty()) return;
  std::array<bool, kNumParts> keep{};
  for (const std::string& name : parts) keep[index(part_from_name(name))] = true;
  std::erase_if(s.entries, [&](const SOSEntry& e) { return !keep[index(e.part)]; });
}

std::string saliency_dump(const Extraction& x) {
  nlohmann::ordered_json doc;
  doc["global_max"] = x.saliency.global_max;
  nlohmann::ordered_json tracks, trees;
  for (int p = 0; p < kNumParts; ++p) {
    tracks[std::string(kPartNames[p])] = x.saliency.tracks[p];
    trees[std::string(kPartNames[p])] = dendrogram_json(x.saliency.trees[p]);
  }
  doc["tracks"] = std::move(tracks);
  doc["trees"] = std::move(trees);
  return doc.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  service::Config cfg;
  CLI::App app{"Salient orientation symbol (SOS) toolkit"};
  app.set_config("--config", "", "TOML configuration file");
  app.require_subcommand(1);
  app.add_option("--scale", cfg.bvh_scale, "BVH units to meters")->check(CLI::PositiveNumber);
  app.add_option("--axis-map", cfg.axis_map, "BVH axes as world x,y,z (e.g. -x,z,y)");

  // extract
  auto* extract = app.add_subcommand("extract", "Extract an SOS script from a motion");
  std::string ex_motion, ex_out, ex_svg, ex_saliency, ex_text;
  double ex_theta = cfg.theta;
  std::vector<std::string> ex_parts;
  std::vector<double> ex_percentiles;
  extract->add_option("motion", ex_motion, "Motion file (.bvh or .json)")->required()->check(CLI::ExistingFile);
  auto* theta_opt = extract->add_option("-t,--threshold", ex_theta, "Relative saliency threshold")
                        ->check(CLI::Range(0.0, 1.0))
                        ->capture_default_str();
  extract->add_option("--percentiles", ex_percentiles, "Per-part saliency percentiles (6 values, RT LA LL RL RA SP)")
      ->expected(kNumParts)
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(theta_opt);
  extract->add_option("--parts", ex_parts, "Keep only these parts")->delimiter(',');
  extract->add_option("-o,--out", ex_out, "SOS JSON output (default stdout)");
  extract->add_option("--svg", ex_svg, "Staff SVG output");
  extract->add_option("--saliency", ex_saliency, "Saliency and dendrogram dump");
  extract->add_option("--text", ex_text, "Text description stored in the script");

  // optimize
  auto* opt = app.add_subcommand("optimize", "Edit a motion toward an SOS script");
  std::string op_motion, op_sos, op_out, op_trace, op_mode = cfg.mode;
  int op_iters = cfg.max_iters, op_harmonics = 4;
  double op_beta = cfg.beta;
  opt->add_option("motion", op_motion, "Initial motion")->required()->check(CLI::ExistingFile);
  opt->add_option("sos", op_sos, "Target SOS JSON")->required()->check(CLI::ExistingFile);
  opt->add_option("--mode", op_mode, "direct or periodic")
      ->check(CLI::IsMember({"direct", "periodic"}))
      ->capture_default_str();
  opt->add_option("--iters", op_iters, "Maximum iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
  opt->add_option("--beta", op_beta, "Soft quantization sharpness")->check(CLI::PositiveNumber)->capture_default_str();
  opt->add_option("--harmonics", op_harmonics, "Sinusoids per channel (periodic mode)")->check(CLI::PositiveNumber);
  opt->add_option("-o,--out", op_out, "Optimized motion JSON");
  opt->add_option("--trace", op_trace, "Loss trace CSV");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "SOS accuracy and 6D rotation distance");
  std::string me_motion, me_ref, me_sos;
  metrics->add_option("motion", me_motion, "Motion to score")->required()->check(CLI::ExistingFile);
  metrics->add_option("reference", me_ref, "Reference motion")->required()->check(CLI::ExistingFile);
  metrics->add_option("sos", me_sos, "SOS JSON")->required()->check(CLI::ExistingFile);

  // augment
  auto* augment = app.add_subcommand("augment", "Sample SOS scripts at random per-part percentiles");
  std::string au_motion, au_dir = ".";
  std::uint64_t au_seed = 0;
  int au_samples = 1;
  augment->add_option("motion", au_motion, "Motion file")->required()->check(CLI::ExistingFile);
  augment->add_option("--seed", au_seed, "Random seed")->capture_default_str();
  augment->add_option("--samples", au_samples, "Number of scripts")->check(CLI::PositiveNumber)->capture_default_str();
  augment->add_option("--out-dir", au_dir, "Output directory")->capture_default_str();

  // render
  auto* render = app.add_subcommand("render", "Render an SOS script as a staff SVG");
  std::string re_sos, re_out;
  StaffOptions re_opt;
  render->add_option("sos", re_sos, "SOS JSON")->required()->check(CLI::ExistingFile);
  render->add_option("-o,--out", re_out, "SVG output (default stdout)");
  render->add_option("--pixels-per-frame", re_opt.pixels_per_frame)->check(CLI::PositiveNumber);
  render->add_option("--column-width", re_opt.column_width)->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve->add_option("-p,--port", cfg.port, "Port")->envname("SOSKIT_PORT")->check(CLI::Range(1, 65535))->capture_default_str();
  serve->add_option("--bind", cfg.bind, "Bind address")->capture_default_str();
  serve->add_option("--data-dir", cfg.data_dir, "Directory served to motion_path requests")->check(CLI::ExistingDirectory);
  serve->add_option("--max-frames", cfg.max_frames, "Longest accepted motion")->check(CLI::Range(2, 1000000));
  serve->add_option("--theta", cfg.theta, "Default threshold")->check(CLI::Range(0.0, 1.0));
  serve->add_option("--beta", cfg.beta, "Default beta")->check(CLI::PositiveNumber);
  serve->add_option("--iters", cfg.max_iters, "Default optimizer iterations")->check(CLI::NonNegativeNumber);
  serve->add_option("--mode", cfg.mode, "Default optimizer mode")->check(CLI::IsMember({"direct", "periodic"}));

  try {
    app.parse(argc, argv);
    parse_axis_map(cfg.axis_map);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*extract) {
      const Motion m = service::load_motion_file(ex_motion, cfg);
      Extraction x;
      if (!ex_percentiles.empty()) {
        std::array<double, kNumParts> pct{};
        std::copy(ex_percentiles.begin(), ex_percentiles.end(), pct.begin());
        x = extract_sos_percentile(m, pct);
      } else {
        x = extract_sos(m, ex_theta);
      }
      keep_parts(x.script, ex_parts);
      if (!ex_text.empty()) x.script.text = ex_text;
      write_text(ex_out, serialize_sos_json(x.script));
      if (!ex_svg.empty()) write_text(ex_svg, render_staff_svg(x.script));
      if (!ex_saliency.empty()) write_text(ex_saliency, saliency_dump(x));
    } else if (*opt) {
      OptimizationProblem p;
      p.initial = service::load_motion_file(op_motion, cfg);
      p.target = load_sos(op_sos);
      p.mode = mode_from_name(op_mode);
      p.max_iters = op_iters;
      p.beta = op_beta;
      p.harmonics = op_harmonics;
      const OptimizationResult r = optimize(p);
      if (!op_out.empty()) write_text(op_out, serialize_motion_json(r.motion) + "\n");
      if (!op_trace.empty()) write_text(op_trace, loss_trace_csv(r.loss_trace));
      nlohmann::ordered_json summary{{"sos_acc", r.sos_acc},
                                     {"l2_rot6d", r.l2_rot6d},
                                     {"converged", r.converged},
                                     {"iterations", r.iterations},
                                     {"final_loss", r.loss_trace.empty() ? nullptr : nlohmann::ordered_json(r.loss_trace.back())}};
      std::cout << summary.dump() << "\n";
    } else if (*metrics) {
      const Motion m = service::load_motion_file(me_motion, cfg);
      const Motion ref = service::load_motion_file(me_ref, cfg);
      const SOSScript s = load_sos(me_sos);
      std::cout << nlohmann::ordered_json{{"sos_acc", sos_accuracy(m, s)}, {"l2_rot6d", l2_rot6d(m, ref)}}.dump()
                << "\n";
    } else if (*augment) {
      const Motion m = service::load_motion_file(au_motion, cfg);
      const OrientationFeatures f = extract_orientation_features(m);
      const SaliencyResult sal = saliency_all_parts(f);
      fs::create_directories(au_dir);
      const auto draws = sample_percentiles(au_seed, au_samples);
      for (size_t i = 0; i < draws.size(); ++i) {
        const SOSScript s = synthesize_sos(f, sms_mask_percentile(sal.tracks, draws[i]), m.fps);
        char name[32];
        std::snprintf(name, sizeof name, "sos_%03zu.json", i);
        write_text((fs::path(au_dir) / name).string(), serialize_sos_json(s));
      }
    } else if (*render) {
      write_text(re_out, render_staff_svg(load_sos(re_sos), re_opt));
    } else if (*serve) {
      service::validate(cfg);
      auto server = service::make_server(cfg);
      std::cerr << "soskit listening on " << cfg.bind << ":" << cfg.port << "\n";
      if (!server->listen(cfg.bind, cfg.port)) throw std::runtime_error("cannot listen on port " + std::to_string(cfg.port));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
