#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affreg/corners.hpp"
#include "affreg/evolver.hpp"
#include "affreg/image.hpp"
#include "affreg/pareto.hpp"
#include "affreg/points.hpp"
#include "affreg/similarity.hpp"
#include "affreg/transform.hpp"

namespace affreg {

// A registration problem with known ground truth. `ground_truth` maps
// sensed coordinates to reference coordinates, so registering sensed
// against reference should recover it.
struct SyntheticCase {
  Image reference;
  Image sensed;
  std::vector<std::uint8_t> sensed_mask;  // pixels of `sensed` holding warped content
  Transform ground_truth;
  PointSet control_ref;     // interior grid in the reference frame
  PointSet control_sensed;  // exact ground-truth preimages, index-paired
};

// sensed(q) = reference(M q) with M = compose_matrix(t, frame center);
// out-of-range pixels become 0 with sensed_mask false. Seeded Gaussian
// noise of noise_sigma is then added to mask-true pixels, clamped to
// [0, 255]; noise perturbs intensities only, never control-point geometry.
// Control points are a grid x grid lattice placed strictly inside the
// frame. Throws case_rejected_error when under half the frame stays valid.
SyntheticCase make_synthetic(const Image& reference, const Transform& t, double noise_sigma,
                             int grid, std::uint64_t seed);

enum class Mode { semi_automatic, fully_automatic };

Mode mode_from_string(const std::string& s);  // "semi" | "auto" (throws config_error)
std::string to_string(Mode mode);

// Corner settings for registration runs: wider smoothing and spacing than
// the detector's bare defaults, tuned on the synthetic suite for
// repeatability under warp and intensity noise.
inline CornerParams registration_corner_params() {
  CornerParams p;
  p.min_separation = 12.0;
  p.sigma = 1.5;
  return p;
}

struct RunOptions {
  Mode mode = Mode::fully_automatic;
  GAConfig cfg;
  std::optional<Bounds> bounds;  // defaults to Bounds::defaults(reference dims)

  // Feature points, required in semi-automatic mode; fully-automatic mode
  // runs detect_corners on both images instead.
  std::optional<PointSet> ref_points;
  std::optional<PointSet> sensed_points;

  // Scoring points; rmse stays NaN (and success false) unless both are set.
  std::optional<PointSet> control_ref;
  std::optional<PointSet> control_sensed;

  CornerParams corner_params = registration_corner_params();
  double rmse_threshold = 1.5;  // pixels
  double min_overlap_frac = kDefaultMinOverlapFrac;

  // Trust flags for the sensed image (synthetic warps fabricate their
  // borders); used by fully-automatic corner detection when present.
  std::optional<std::vector<std::uint8_t>> sensed_valid;

  // Independent phase-1 starts. The coarse landscape is multimodal, so
  // each start evolves its own population and phase 2 is seeded with the
  // best of every start interleaved; its NCC objective then separates the
  // true basin from impostors with similar feature distance.
  int phase1_restarts = 4;

  // Test hook: overwrites one initial individual with this transform, so a
  // planted optimum must survive elitism all the way to the report.
  std::optional<Transform> planted;
};

struct RunReport {
  Transform final_transform;
  double rmse = std::numeric_limits<double>::quiet_NaN();  // pixels
  double ncc = std::numeric_limits<double>::quiet_NaN();
  int phase1_generations = 0;
  int phase2_generations = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds; excluded from determinism comparisons
  bool success = false;    // rmse < rmse_threshold
};

// Report serialization rounds every number to 9 significant digits so
// repeated runs diff cleanly.
nlohmann::ordered_json to_json(const RunReport& r);

struct RunDiagnostics {
  // One best_history per phase-1 start; each is non-increasing under
  // elitism.
  std::vector<std::vector<double>> phase1_histories;
  std::vector<double> phase2_ncc_history;  // best front-0 ncc per generation
  PointSet ref_features;
  PointSet sensed_features;
  std::vector<RankedIndividual> final_ranked;
};

// Full pipeline: features -> run_phase1 -> run_phase2 -> select_final,
// scored against the control points when provided. Throws
// insufficient_features_error, registration_failed_error or config_error.
RunReport run_registration(const Image& reference, const Image& sensed, const RunOptions& opt,
                           RunDiagnostics* diagnostics = nullptr);

// Procedural base images, deterministic in (kind, size, seed):
//   "checker"  checkerboard with smooth multi-scale texture and blobs
//   "blobs"    Gaussian blob field over a gradient background
// Intensities stay within [30, 225] so mild noise rarely clips.
Image make_base_image(const std::string& kind, int size, std::uint64_t seed);

// Resolves a manifest base spec: "procedural:checker[:seed]",
// "procedural:blobs[:seed]", or a readable image path.
Image load_base_image(const std::string& spec, int size);

// One transform sampled uniformly per gene within bounds, in the gene
// order tx, ty, theta, scale, shear_x, shear_y.
Transform sample_transform(const Bounds& bounds, Rng& rng);

struct SuiteCase {
  std::string name;
  std::string base;  // base spec as above
  std::optional<Transform> transform;  // nullopt: sampled with transform_seed
  std::uint64_t transform_seed = 0;    // also seeds the intensity noise
  double noise_sigma = 0.0;
};

struct SuiteConfig {
  std::vector<SuiteCase> cases;
  std::vector<std::uint64_t> seeds;  // GA seeds, one run per (case, seed)
  GAConfig cfg;
  Mode mode = Mode::fully_automatic;
  int image_size = 256;
  int grid = 5;
  double rmse_threshold = 1.5;
  CornerParams corner_params = registration_corner_params();
};

// 10 cases (two procedural bases, five transforms each, noise sigma in
// {0, 5, 10}) x 20 seeds.
SuiteConfig default_suite();

// Manifest schema (JSON): {"cases": [{"name", "base", "transform":
// object | "random:<seed>", "noise_sigma"}...], "seeds": [...],
// "ga": {...}, "mode", "image_size", "grid", "rmse_threshold"}; every key
// outside "cases" is optional and overrides the defaults above.
SuiteConfig suite_from_json(const nlohmann::json& manifest);
SuiteConfig load_suite(const std::filesystem::path& manifest_path);

struct RunRecord {
  std::string case_name;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  RunReport report;
  std::vector<std::vector<double>> phase1_histories;
  std::string failure;  // exception message when the run aborted
};

struct CaseStats {
  std::string name;
  double noise_sigma = 0.0;
  double avg_rmse = std::numeric_limits<double>::quiet_NaN();
  double sigma_rmse = std::numeric_limits<double>::quiet_NaN();  // population sigma
  double success_rate = 0.0;
  int runs = 0;
};

struct SuiteResult {
  std::vector<RunRecord> runs;  // case-major, seed-minor order
  std::vector<CaseStats> cases;
  double success_rate = 0.0;
  std::vector<std::pair<double, double>> success_by_sigma;  // (noise sigma, rate), sigma ascending
};

// Materializes each case once (same images for every seed, mirroring
// repeated-trial statistics), runs all (case, seed) pairs, aggregates in
// run order from the 9-digit-rounded per-run values so the CSV rows
// reproduce every aggregate exactly. Failed runs count as non-success with
// rmse excluded from the averages.
SuiteResult run_suite(const SuiteConfig& suite);

// Aggregation step of run_suite, split out so the statistics are testable
// on fabricated records. Expects runs laid out case-major: one record per
// (case, seed) in suite order.
SuiteResult aggregate_suite(const SuiteConfig& suite, std::vector<RunRecord> runs);

// Per-run rows: case, seed, noise_sigma, rmse, ncc, success,
// phase1_generations, phase2_generations, wall_time.
void save_runs_csv(const SuiteResult& result, const std::filesystem::path& path);

// One "image,avg_rmse,sigma_rmse" row per case, then a success_rate line.
void save_suite_csv(const SuiteResult& result, const std::filesystem::path& path);

nlohmann::ordered_json suite_summary_json(const SuiteConfig& suite, const SuiteResult& result);

// Nearest double to the 9-significant-digit decimal form of v; applied to
// every number that reaches a report, CSV or aggregate.
double round9(double v);

// "%.9g" formatting used by all text artifacts.
std::string format9(double v);

}  // namespace affreg
