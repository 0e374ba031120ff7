// Command-line front end: register, synth, eval and features commands.
// Exit codes: 0 success, 1 usage or I/O problems, 2 algorithmic failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "affreg/corners.hpp"
#include "affreg/errors.hpp"
#include "affreg/harness.hpp"
#include "affreg/image_io.hpp"
#include "affreg/threading.hpp"
#include "affreg/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAlgorithm = 2;

struct BoundsFlags {
  std::vector<double> tx, ty, theta, scale, shear_x, shear_y;

  void add_options(CLI::App* cmd) {
    auto pair = [cmd](std::vector<double>& target, const std::string& flag,
                      const std::string& help) {
      cmd->add_option(flag, target, help)->expected(2);
    };
    pair(tx, "--bounds-tx", "tx search interval: LO HI (pixels)");
    pair(ty, "--bounds-ty", "ty search interval: LO HI (pixels)");
    pair(theta, "--bounds-theta", "rotation interval: LO HI (radians)");
    pair(scale, "--bounds-scale", "scale interval: LO HI");
    pair(shear_x, "--bounds-shear-x", "shear_x interval: LO HI");
    pair(shear_y, "--bounds-shear-y", "shear_y interval: LO HI");
  }

  void apply(affreg::Bounds& bounds) const {
    auto set = [](affreg::Bounds::Interval& iv, const std::vector<double>& v) {
      if (v.size() == 2) iv = {v[0], v[1]};
    };
    set(bounds.tx, tx);
    set(bounds.ty, ty);
    set(bounds.theta, theta);
    set(bounds.scale, scale);
    set(bounds.shear_x, shear_x);
    set(bounds.shear_y, shear_y);
  }
};

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw affreg::io_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw affreg::corrupt_file_error("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw affreg::io_error("cannot write " + path.string());
  out << text;
}

void write_report(const fs::path& path, const ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw affreg::io_error("cannot create output directory " + dir.string());
  return dir;
}

std::string image_extension() { return affreg::png_supported() ? ".png" : ".pgm"; }

// Alternating 32-px tiles from the reference and the registered image;
// misregistration shows up as discontinuities at tile seams.
affreg::Image checkerboard_overlay(const affreg::Image& reference,
                                   const affreg::MaskedImage& warped) {
  const int tile = 32;
  affreg::Image overlay(reference.width(), reference.height());
  for (int y = 0; y < reference.height(); ++y) {
    for (int x = 0; x < reference.width(); ++x) {
      const bool from_ref = ((x / tile) + (y / tile)) % 2 == 0;
      overlay.at(x, y) = from_ref ? reference.at(x, y) : warped.image.at(x, y);
    }
  }
  return overlay;
}

struct RegisterArgs {
  std::string ref_path;
  std::string sensed_path;
  std::string mode = "auto";
  std::string ref_points_path;
  std::string sensed_points_path;
  std::string control_ref_path;
  std::string control_sensed_path;
  std::string config_path;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  double rmse_threshold = 1.5;
  bool rmse_threshold_set = false;
  bool front_csv = false;
  BoundsFlags bounds;
};

int cmd_register(const RegisterArgs& args) {
  affreg::set_max_threads(args.jobs);
  const affreg::Image reference = affreg::load_image(args.ref_path);
  const affreg::Image sensed = affreg::load_image(args.sensed_path);

  affreg::RunOptions opt;
  opt.mode = affreg::mode_from_string(args.mode);
  affreg::Bounds bounds = affreg::Bounds::defaults(reference.width(), reference.height());

  if (!args.config_path.empty()) {
    const json cfg = load_json_file(args.config_path);
    if (cfg.contains("ga")) opt.cfg = affreg::ga_config_from_json(cfg.at("ga"), opt.cfg);
    if (cfg.contains("bounds")) bounds = affreg::bounds_from_json(cfg.at("bounds"), bounds);
    if (cfg.contains("rmse_threshold")) opt.rmse_threshold = cfg.at("rmse_threshold").get<double>();
    if (cfg.contains("min_overlap_frac")) {
      opt.min_overlap_frac = cfg.at("min_overlap_frac").get<double>();
    }
    if (cfg.contains("corners")) {
      const json& jc = cfg.at("corners");
      opt.corner_params.max_points = jc.value("max_points", opt.corner_params.max_points);
      opt.corner_params.min_separation =
          jc.value("min_separation", opt.corner_params.min_separation);
      opt.corner_params.sigma = jc.value("sigma", opt.corner_params.sigma);
      opt.corner_params.k = jc.value("k", opt.corner_params.k);
    }
  }
  args.bounds.apply(bounds);
  opt.bounds = bounds;
  if (args.seed_set) opt.cfg.seed = args.seed;
  if (args.rmse_threshold_set) opt.rmse_threshold = args.rmse_threshold;

  if (opt.mode == affreg::Mode::semi_automatic) {
    if (args.ref_points_path.empty() || args.sensed_points_path.empty()) {
      throw affreg::config_error(
          "semi-automatic mode requires --ref-points and --sensed-points");
    }
    opt.ref_points = affreg::load_points(args.ref_points_path);
    opt.sensed_points = affreg::load_points(args.sensed_points_path);
  }
  const bool scored = !args.control_ref_path.empty() && !args.control_sensed_path.empty();
  if (!args.control_ref_path.empty()) opt.control_ref = affreg::load_points(args.control_ref_path);
  if (!args.control_sensed_path.empty()) {
    opt.control_sensed = affreg::load_points(args.control_sensed_path);
  }
  if (scored != (opt.control_ref && opt.control_sensed)) {
    throw affreg::config_error("--control-ref and --control-sensed must be given together");
  }

  const fs::path out_dir = ensure_out_dir(args.out);

  affreg::RunDiagnostics diag;
  const affreg::RunReport report = affreg::run_registration(reference, sensed, opt, &diag);

  const affreg::Point center = affreg::frame_center(reference.width(), reference.height());
  const affreg::MaskedImage warped = affreg::warp_image(
      sensed, report.final_transform, reference.width(), reference.height(), center);
  affreg::save_image(warped.image, out_dir / ("warped" + image_extension()));
  affreg::save_image(checkerboard_overlay(reference, warped),
                     out_dir / ("overlay" + image_extension()));

  ordered_json j = affreg::to_json(report);
  if (!scored) {
    // Unscored runs have no rmse, so the success flag is meaningless too.
    j["rmse"] = nullptr;
    j["success"] = nullptr;
  }
  write_report(out_dir / "report.json", j);
  if (args.front_csv) affreg::save_front_csv(diag.final_ranked, out_dir / "front.csv");

  std::printf("rmse %s ncc %s (%d + %d generations)\n", affreg::format9(report.rmse).c_str(),
              affreg::format9(report.ncc).c_str(), report.phase1_generations,
              report.phase2_generations);
  if (!scored) return kExitOk;
  return report.success ? kExitOk : kExitAlgorithm;
}

struct SynthArgs {
  std::string base = "procedural:checker";
  std::string transform_path;
  double tx = 0.0, ty = 0.0, theta = 0.0, scale = 1.0, shear_x = 0.0, shear_y = 0.0;
  double noise_sigma = 0.0;
  int grid = 5;
  int size = 256;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int cmd_synth(const SynthArgs& args) {
  const affreg::Image reference = affreg::load_base_image(args.base, args.size);

  affreg::Transform t{args.tx, args.ty, args.theta, args.scale, args.shear_x, args.shear_y};
  if (!args.transform_path.empty()) {
    t = affreg::transform_from_json(load_json_file(args.transform_path));
  }

  const affreg::SyntheticCase sc =
      affreg::make_synthetic(reference, t, args.noise_sigma, args.grid, args.seed);

  const fs::path out_dir = ensure_out_dir(args.out);
  const std::string ext = image_extension();
  affreg::save_image(sc.reference, out_dir / ("reference" + ext));
  affreg::save_image(sc.sensed, out_dir / ("sensed" + ext));
  affreg::save_points(sc.control_ref, out_dir / "control_ref.csv");
  affreg::save_points(sc.control_sensed, out_dir / "control_sensed.csv");

  ordered_json truth;
  json tj = affreg::to_json(sc.ground_truth);
  ordered_json tjo;
  for (const char* key : {"tx", "ty", "theta", "scale", "shear_x", "shear_y"}) {
    tjo[key] = affreg::round9(tj.at(key).get<double>());
  }
  truth["ground_truth"] = std::move(tjo);
  truth["noise_sigma"] = affreg::round9(args.noise_sigma);
  truth["grid"] = args.grid;
  truth["seed"] = args.seed;
  write_report(out_dir / "truth.json", truth);

  std::printf("wrote %s case to %s\n", args.base.c_str(), out_dir.string().c_str());
  return kExitOk;
}

struct EvalArgs {
  std::string manifest = "default";
  std::string out = ".";
  int jobs = 1;
};

int cmd_eval(const EvalArgs& args) {
  affreg::set_max_threads(args.jobs);
  const affreg::SuiteConfig suite = args.manifest == "default"
                                        ? affreg::default_suite()
                                        : affreg::load_suite(args.manifest);

  const fs::path out_dir = ensure_out_dir(args.out);
  const affreg::SuiteResult result = affreg::run_suite(suite);

  affreg::save_runs_csv(result, out_dir / "runs.csv");
  affreg::save_suite_csv(result, out_dir / "suite.csv");
  write_report(out_dir / "summary.json", affreg::suite_summary_json(suite, result));

  const fs::path reports_dir = out_dir / "reports";
  std::error_code ec;
  fs::create_directories(reports_dir, ec);
  if (ec) throw affreg::io_error("cannot create " + reports_dir.string());
  for (const affreg::RunRecord& rec : result.runs) {
    ordered_json j;
    j["case"] = rec.case_name;
    j["seed"] = rec.seed;
    j["noise_sigma"] = affreg::round9(rec.noise_sigma);
    if (rec.failure.empty()) {
      j["report"] = affreg::to_json(rec.report);
    } else {
      j["failure"] = rec.failure;
    }
    write_report(reports_dir / (rec.case_name + "_seed" + std::to_string(rec.seed) + ".json"), j);
  }

  std::printf("success_rate %s over %zu runs\n", affreg::format9(result.success_rate).c_str(),
              result.runs.size());
  return kExitOk;
}

struct FeaturesArgs {
  std::string ref_path;
  int max_points = 60;
  double min_separation = 8.0;
  std::string out = ".";
};

int cmd_features(const FeaturesArgs& args) {
  const affreg::Image img = affreg::load_image(args.ref_path);
  const affreg::PointSet pts = affreg::detect_corners(img, args.max_points, args.min_separation);
  const fs::path out_dir = ensure_out_dir(args.out);
  affreg::save_points(pts, out_dir / "features.csv");
  std::printf("%zu features\n", pts.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine image registration by a two-phase genetic search"};
  app.require_subcommand(1);

  RegisterArgs reg;
  CLI::App* reg_cmd = app.add_subcommand("register", "Register a sensed image to a reference");
  reg_cmd->add_option("--ref", reg.ref_path, "reference image (PGM/PPM/PNG)")->required();
  reg_cmd->add_option("--sensed", reg.sensed_path, "sensed image to align")->required();
  reg_cmd->add_option("--mode", reg.mode, "auto (detect corners) or semi (point files)");
  reg_cmd->add_option("--ref-points", reg.ref_points_path, "reference feature points CSV");
  reg_cmd->add_option("--sensed-points", reg.sensed_points_path, "sensed feature points CSV");
  reg_cmd->add_option("--control-ref", reg.control_ref_path, "control points CSV for scoring");
  reg_cmd->add_option("--control-sensed", reg.control_sensed_path,
                      "paired sensed control points CSV");
  reg_cmd->add_option("--config", reg.config_path, "JSON config (ga, bounds, corners, ...)");
  reg_cmd->add_option("--seed", reg.seed, "GA seed");
  reg_cmd->add_option("--out", reg.out, "output directory");
  reg_cmd->add_option("--jobs", reg.jobs, "evaluation threads (1 = deterministic default)");
  reg_cmd->add_option("--rmse-threshold", reg.rmse_threshold, "success threshold in pixels");
  reg_cmd->add_flag("--front-csv", reg.front_csv, "also write the final Pareto front");
  reg.bounds.add_options(reg_cmd);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic ground-truth case");
  synth_cmd->add_option("--ref", synth.base,
                        "base image path or procedural:checker|blobs[:seed]");
  synth_cmd->add_option("--transform", synth.transform_path, "transform JSON file");
  synth_cmd->add_option("--tx", synth.tx, "translation x (pixels)");
  synth_cmd->add_option("--ty", synth.ty, "translation y (pixels)");
  synth_cmd->add_option("--theta", synth.theta, "rotation (radians)");
  synth_cmd->add_option("--scale", synth.scale, "uniform scale");
  synth_cmd->add_option("--shear-x", synth.shear_x, "shear x");
  synth_cmd->add_option("--shear-y", synth.shear_y, "shear y");
  synth_cmd->add_option("--noise-sigma", synth.noise_sigma, "intensity noise sigma");
  synth_cmd->add_option("--grid", synth.grid, "control grid (grid x grid)");
  synth_cmd->add_option("--size", synth.size, "procedural base size");
  synth_cmd->add_option("--seed", synth.seed, "noise seed");
  synth_cmd->add_option("--out", synth.out, "output directory");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Run a synthetic suite and aggregate RMSE");
  eval_cmd->add_option("--manifest", eval.manifest, "suite manifest JSON or 'default'");
  eval_cmd->add_option("--out", eval.out, "output directory");
  eval_cmd->add_option("--jobs", eval.jobs, "parallel runs (1 = deterministic default)");

  FeaturesArgs feat;
  CLI::App* feat_cmd = app.add_subcommand("features", "Detect corner features");
  feat_cmd->add_option("--ref", feat.ref_path, "input image")->required();
  feat_cmd->add_option("--max-points", feat.max_points, "feature budget");
  feat_cmd->add_option("--min-separation", feat.min_separation, "minimum spacing (pixels)");
  feat_cmd->add_option("--out", feat.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (reg_cmd->parsed()) {
      reg.seed_set = reg_cmd->count("--seed") > 0;
      reg.rmse_threshold_set = reg_cmd->count("--rmse-threshold") > 0;
      return cmd_register(reg);
    }
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (feat_cmd->parsed()) return cmd_features(feat);
  } catch (const affreg::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const affreg::unsupported_format_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const affreg::corrupt_file_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const affreg::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const affreg::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAlgorithm;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
