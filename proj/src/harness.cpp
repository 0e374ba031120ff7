#include "affreg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "affreg/errors.hpp"
#include "affreg/image_io.hpp"
#include "affreg/threading.hpp"
#include "affreg/warp.hpp"

namespace affreg {

double round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

std::string format9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("REG_LOG");
    return env != nullptr ? std::atoi(env) : 0;
  }();
  return level;
}

}  // namespace

SyntheticCase make_synthetic(const Image& reference, const Transform& t, double noise_sigma,
                             int grid, std::uint64_t seed) {
  if (grid < 2) throw config_error("make_synthetic: control grid must be at least 2x2");
  if (noise_sigma < 0.0) throw config_error("make_synthetic: noise sigma must be non-negative");

  const int w = reference.width();
  const int h = reference.height();
  const Point center = frame_center(w, h);

  // sensed(q) = reference(M q), so registering sensed back onto the
  // reference recovers t exactly.
  const AffineMatrix m = compose_matrix(t, center);
  MaskedImage warped(w, h);
  pullback(reference, m, warped);

  if (warped.overlap_fraction() < 0.5) {
    throw case_rejected_error("make_synthetic: transform leaves " +
                              format9(warped.overlap_fraction()) +
                              " of the frame valid, under the 0.5 minimum");
  }

  SyntheticCase sc;
  sc.reference = reference;
  sc.sensed = std::move(warped.image);
  sc.sensed_mask = std::move(warped.mask);
  sc.ground_truth = t;

  if (noise_sigma > 0.0) {
    Rng rng(seed);
    std::vector<double>& px = sc.sensed.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (!sc.sensed_mask[i]) continue;
      px[i] = std::clamp(px[i] + rng.gaussian() * noise_sigma, 0.0, 255.0);
    }
  }

  // Interior lattice at fractions 1/(grid+1) .. grid/(grid+1) of the frame.
  sc.control_ref.source = PointSource::manual;
  for (int gy = 1; gy <= grid; ++gy) {
    for (int gx = 1; gx <= grid; ++gx) {
      sc.control_ref.points.push_back({(w - 1) * static_cast<double>(gx) / (grid + 1),
                                       (h - 1) * static_cast<double>(gy) / (grid + 1)});
    }
  }
  sc.control_sensed = apply(invert(t, center), sc.control_ref);
  return sc;
}

Mode mode_from_string(const std::string& s) {
  if (s == "semi" || s == "semi_automatic" || s == "semi-automatic") return Mode::semi_automatic;
  if (s == "auto" || s == "fully_automatic" || s == "fully-automatic" || s == "full") {
    return Mode::fully_automatic;
  }
  throw config_error("unknown mode '" + s + "' (expected 'semi' or 'auto')");
}

std::string to_string(Mode mode) {
  // Canonical manifest vocabulary; round-trips through mode_from_string.
  return mode == Mode::semi_automatic ? "semi" : "auto";
}

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  nlohmann::json t = to_json(r.final_transform);
  nlohmann::ordered_json tj;
  for (const char* key : {"tx", "ty", "theta", "scale", "shear_x", "shear_y"}) {
    tj[key] = round9(t.at(key).get<double>());
  }
  j["final_transform"] = std::move(tj);
  // Real nulls, not NaN doubles: dump() would print both as null, but only
  // a true null survives a parse/serialize round trip unchanged.
  j["rmse"] = std::isnan(r.rmse) ? nlohmann::ordered_json(nullptr)
                                 : nlohmann::ordered_json(round9(r.rmse));
  j["ncc"] = std::isnan(r.ncc) ? nlohmann::ordered_json(nullptr)
                               : nlohmann::ordered_json(round9(r.ncc));
  j["success"] = r.success;
  j["phase1_generations"] = r.phase1_generations;
  j["phase2_generations"] = r.phase2_generations;
  j["seed"] = r.seed;
  j["wall_time"] = round9(r.wall_time);
  return j;
}

RunReport run_registration(const Image& reference, const Image& sensed, const RunOptions& opt,
                           RunDiagnostics* diagnostics) {
  const auto t_start = std::chrono::steady_clock::now();
  opt.cfg.validate();

  const Bounds bounds =
      opt.bounds ? *opt.bounds : Bounds::defaults(reference.width(), reference.height());
  bounds.validate();
  const Point center = frame_center(reference.width(), reference.height());

  PointSet ref_pts, sensed_pts;
  if (opt.mode == Mode::semi_automatic) {
    if (!opt.ref_points || !opt.sensed_points) {
      throw config_error("semi-automatic mode requires feature points for both images");
    }
    ref_pts = *opt.ref_points;
    sensed_pts = *opt.sensed_points;
  } else {
    ref_pts = detect_corners(reference, opt.corner_params, nullptr);
    sensed_pts = detect_corners(sensed, opt.corner_params,
                                opt.sensed_valid ? &*opt.sensed_valid : nullptr);
  }
  if (diagnostics != nullptr) {
    diagnostics->ref_features = ref_pts;
    diagnostics->sensed_features = sensed_pts;
  }

  // Independent phase-1 starts on one sequential RNG stream, so the whole
  // pipeline stays a deterministic function of cfg.seed.
  Rng rng(opt.cfg.seed);
  const int restarts = std::max(1, opt.phase1_restarts);
  std::vector<Population> finals;
  finals.reserve(static_cast<std::size_t>(restarts));
  int phase1_generations = 0;
  for (int start = 0; start < restarts; ++start) {
    Population pop = init_population(opt.cfg, bounds, rng);
    if (start == 0 && opt.planted && !pop.individuals.empty()) {
      pop.individuals.front().genes = bounds.clamp(*opt.planted);
      pop.individuals.front().evaluated = false;
    }
    pop = run_phase1(std::move(pop), ref_pts, sensed_pts, opt.cfg, bounds, center, rng);
    phase1_generations += pop.generation;
    if (diagnostics != nullptr) diagnostics->phase1_histories.push_back(pop.best_history);
    if (log_level() >= 2) {
      std::fprintf(stderr, "[reg] phase1 start %d: %d generations, best median_dist %s\n", start,
                   pop.generation,
                   format9(pop.individuals[best_phase1_index(pop)].fitness.median_dist).c_str());
    }
    finals.push_back(std::move(pop));
  }

  // Phase-2 seed: round-robin over each start's fitness-ordered
  // population, keeping population_size individuals and every basin found.
  Population seed;
  if (restarts == 1) {
    seed = std::move(finals.front());
    seed.generation = 0;
  } else {
    for (Population& pop : finals) {
      std::stable_sort(pop.individuals.begin(), pop.individuals.end(),
                       [](const Individual& a, const Individual& b) {
                         return phase1_better(a.fitness, b.fitness);
                       });
    }
    const std::size_t target = static_cast<std::size_t>(opt.cfg.population_size);
    for (std::size_t rank = 0; seed.individuals.size() < target; ++rank) {
      bool any = false;
      for (const Population& pop : finals) {
        if (rank < pop.individuals.size()) {
          any = true;
          seed.individuals.push_back(pop.individuals[rank]);
          if (seed.individuals.size() >= target) break;
        }
      }
      if (!any) break;
    }
  }

  Phase2Result p2 = run_phase2(std::move(seed), reference, sensed, ref_pts, sensed_pts, opt.cfg,
                               bounds, center, rng, opt.min_overlap_frac);
  if (diagnostics != nullptr) diagnostics->phase2_ncc_history = p2.best_ncc_history;

  const Individual& final_ind = select_final(p2.ranked);

  RunReport report;
  report.final_transform = final_ind.genes;
  report.ncc = final_ind.fitness.ncc;
  report.phase1_generations = phase1_generations;
  report.phase2_generations = p2.generations;
  report.seed = opt.cfg.seed;
  if (opt.control_ref && opt.control_sensed) {
    report.rmse = rmse(*opt.control_ref, *opt.control_sensed, final_ind.genes, center);
    report.success = report.rmse < opt.rmse_threshold;
  }
  if (diagnostics != nullptr) diagnostics->final_ranked = std::move(p2.ranked);

  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (log_level() >= 2) {
    std::fprintf(stderr, "[reg] phase2: %d generations, ncc %s, rmse %s\n",
                 report.phase2_generations, format9(report.ncc).c_str(),
                 format9(report.rmse).c_str());
  }
  return report;
}

namespace {

// Smooth value noise: one random value per lattice cell, bilinearly
// upsampled. Adds amplitude * value to every pixel.
void add_value_noise(Image& img, int cell, double amplitude, Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  const int gw = w / cell + 2;
  const int gh = h / cell + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (double& v : lattice) v = rng.uniform(-1.0, 1.0);

  for (int y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const double wy = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const double wx = fx - x0;
      const double* row0 = lattice.data() + static_cast<std::size_t>(y0) * gw;
      const double* row1 = row0 + gw;
      const double top = (1.0 - wx) * row0[x0] + wx * row0[x0 + 1];
      const double bot = (1.0 - wx) * row1[x0] + wx * row1[x0 + 1];
      img.at(x, y) += amplitude * ((1.0 - wy) * top + wy * bot);
    }
  }
}

void add_gaussian_blob(Image& img, double cx, double cy, double sigma, double amplitude) {
  const int w = img.width();
  const int h = img.height();
  const int r = static_cast<int>(std::ceil(4.0 * sigma));
  const int x0 = std::max(0, static_cast<int>(cx) - r);
  const int x1 = std::min(w - 1, static_cast<int>(cx) + r);
  const int y0 = std::max(0, static_cast<int>(cy) - r);
  const int y1 = std::min(h - 1, static_cast<int>(cy) + r);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      img.at(x, y) += amplitude * std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
}

void clamp_image(Image& img, double lo, double hi) {
  for (double& v : img.data()) v = std::clamp(v, lo, hi);
}

}  // namespace

Image make_base_image(const std::string& kind, int size, std::uint64_t seed) {
  if (size < 32) throw config_error("make_base_image: size must be at least 32");
  Rng rng(seed);
  Image img(size, size);

  if (kind == "checker") {
    const int tile = 32;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        img.at(x, y) = ((x / tile + y / tile) % 2 == 0) ? 80.0 : 170.0;
      }
    }
    // Aperiodic texture so the checker's translational symmetry cannot
    // fool the intensity objective.
    add_value_noise(img, 64, 28.0, rng);
    add_value_noise(img, 32, 18.0, rng);
    add_value_noise(img, 16, 10.0, rng);
    for (int i = 0; i < 25; ++i) {
      const double cx = rng.uniform(0.1, 0.9) * size;
      const double cy = rng.uniform(0.1, 0.9) * size;
      const double sigma = rng.uniform(3.0, 8.0);
      const double amp = rng.uniform(25.0, 55.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
      add_gaussian_blob(img, cx, cy, sigma, amp);
    }
  } else if (kind == "blobs") {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        img.at(x, y) = 90.0 + 60.0 * (x + y) / (2.0 * (size - 1));
      }
    }
    for (int i = 0; i < 80; ++i) {
      const double cx = rng.uniform(0.05, 0.95) * size;
      const double cy = rng.uniform(0.05, 0.95) * size;
      const double sigma = rng.uniform(2.0, 10.0);
      const double amp = rng.uniform(30.0, 70.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
      add_gaussian_blob(img, cx, cy, sigma, amp);
    }
    add_value_noise(img, 32, 12.0, rng);
  } else {
    throw config_error("make_base_image: unknown kind '" + kind + "'");
  }

  clamp_image(img, 30.0, 225.0);
  return img;
}

Image load_base_image(const std::string& spec, int size) {
  const std::string prefix = "procedural:";
  if (spec.rfind(prefix, 0) != 0) return load_image(spec);

  std::string rest = spec.substr(prefix.size());
  std::uint64_t seed = 0;
  const std::size_t colon = rest.find(':');
  std::string kind = rest.substr(0, colon);
  if (colon != std::string::npos) {
    try {
      seed = std::stoull(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw config_error("bad procedural base spec '" + spec + "'");
    }
  } else {
    if (kind == "checker") seed = 101;
    else if (kind == "blobs") seed = 202;
  }
  return make_base_image(kind, size, seed);
}

Transform sample_transform(const Bounds& bounds, Rng& rng) {
  Transform t;
  t.tx = rng.uniform(bounds.tx.lo, bounds.tx.hi);
  t.ty = rng.uniform(bounds.ty.lo, bounds.ty.hi);
  t.theta = rng.uniform(bounds.theta.lo, bounds.theta.hi);
  t.scale = rng.uniform(bounds.scale.lo, bounds.scale.hi);
  t.shear_x = rng.uniform(bounds.shear_x.lo, bounds.shear_x.hi);
  t.shear_y = rng.uniform(bounds.shear_y.lo, bounds.shear_y.hi);
  return t;
}

SuiteConfig default_suite() {
  SuiteConfig suite;
  const double checker_sigma[] = {0.0, 0.0, 5.0, 5.0, 10.0};
  const double blobs_sigma[] = {0.0, 0.0, 5.0, 10.0, 10.0};
  for (int i = 0; i < 5; ++i) {
    SuiteCase c;
    c.name = "checker_0" + std::to_string(i + 1);
    c.base = "procedural:checker";
    c.transform_seed = static_cast<std::uint64_t>(11 + i);
    c.noise_sigma = checker_sigma[i];
    suite.cases.push_back(std::move(c));
  }
  for (int i = 0; i < 5; ++i) {
    SuiteCase c;
    c.name = "blobs_0" + std::to_string(i + 1);
    c.base = "procedural:blobs";
    c.transform_seed = static_cast<std::uint64_t>(16 + i);
    c.noise_sigma = blobs_sigma[i];
    suite.cases.push_back(std::move(c));
  }
  for (std::uint64_t s = 1; s <= 20; ++s) suite.seeds.push_back(s);
  return suite;
}

SuiteConfig suite_from_json(const nlohmann::json& manifest) {
  SuiteConfig suite = default_suite();
  suite.cases.clear();

  if (!manifest.contains("cases") || !manifest.at("cases").is_array() ||
      manifest.at("cases").empty()) {
    throw config_error("suite manifest needs a non-empty 'cases' array");
  }
  std::size_t index = 0;
  for (const nlohmann::json& jc : manifest.at("cases")) {
    SuiteCase c;
    c.name = jc.value("name", "case_" + std::to_string(index + 1));
    c.base = jc.value("base", "procedural:checker");
    c.noise_sigma = jc.value("noise_sigma", 0.0);
    c.transform_seed = 1000 + index;
    if (jc.contains("transform")) {
      const nlohmann::json& jt = jc.at("transform");
      if (jt.is_string()) {
        const std::string s = jt.get<std::string>();
        if (s.rfind("random:", 0) != 0) {
          throw config_error("case '" + c.name + "': transform string must be 'random:<seed>'");
        }
        try {
          c.transform_seed = std::stoull(s.substr(7));
        } catch (const std::exception&) {
          throw config_error("case '" + c.name + "': bad transform seed in '" + s + "'");
        }
      } else {
        c.transform = transform_from_json(jt);
      }
    }
    suite.cases.push_back(std::move(c));
    ++index;
  }

  if (manifest.contains("seeds")) {
    suite.seeds.clear();
    for (const nlohmann::json& js : manifest.at("seeds")) {
      suite.seeds.push_back(js.get<std::uint64_t>());
    }
    if (suite.seeds.empty()) throw config_error("suite manifest 'seeds' must be non-empty");
  }
  if (manifest.contains("ga")) suite.cfg = ga_config_from_json(manifest.at("ga"), suite.cfg);
  if (manifest.contains("mode")) suite.mode = mode_from_string(manifest.at("mode").get<std::string>());
  suite.image_size = manifest.value("image_size", suite.image_size);
  suite.grid = manifest.value("grid", suite.grid);
  suite.rmse_threshold = manifest.value("rmse_threshold", suite.rmse_threshold);
  if (suite.image_size < 32) throw config_error("suite manifest image_size must be at least 32");
  if (suite.grid < 2) throw config_error("suite manifest grid must be at least 2");
  return suite;
}

SuiteConfig load_suite(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw io_error("cannot open suite manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw corrupt_file_error("bad JSON in suite manifest " + manifest_path.string() + ": " +
                             e.what());
  }
  return suite_from_json(manifest);
}

namespace {

struct PreparedCase {
  SyntheticCase sc;
  PointSet semi_ref;
  PointSet semi_sensed;
};

PreparedCase prepare_case(const SuiteCase& c, const SuiteConfig& suite) {
  PreparedCase prep;
  const Image base = load_base_image(c.base, suite.image_size);
  const Bounds bounds = Bounds::defaults(base.width(), base.height());

  if (c.transform) {
    prep.sc = make_synthetic(base, *c.transform, c.noise_sigma, suite.grid, c.transform_seed);
  } else {
    // Rejection-sample until the warp keeps enough of the frame.
    Rng rng(c.transform_seed);
    bool made = false;
    for (int attempt = 0; attempt < 64 && !made; ++attempt) {
      const Transform t = sample_transform(bounds, rng);
      try {
        prep.sc = make_synthetic(base, t, c.noise_sigma, suite.grid, c.transform_seed);
        made = true;
      } catch (const case_rejected_error&) {
      }
    }
    if (!made) {
      throw case_rejected_error("case '" + c.name +
                                "': no transform with enough overlap in 64 samples");
    }
  }

  if (suite.mode == Mode::semi_automatic) {
    // Ground-truth-derived features: corners of the reference paired with
    // their exact preimages in the sensed frame.
    const Point center = frame_center(prep.sc.reference.width(), prep.sc.reference.height());
    prep.semi_ref = detect_corners(prep.sc.reference, suite.corner_params);
    prep.semi_sensed = apply(invert(prep.sc.ground_truth, center), prep.semi_ref);
  }
  return prep;
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& suite) {
  if (suite.cases.empty() || suite.seeds.empty()) {
    throw config_error("run_suite: needs at least one case and one seed");
  }
  suite.cfg.validate();

  std::vector<PreparedCase> prepared;
  prepared.reserve(suite.cases.size());
  for (const SuiteCase& c : suite.cases) {
    prepared.push_back(prepare_case(c, suite));
    if (log_level() >= 1) {
      std::fprintf(stderr, "[suite] prepared %s (noise %s)\n", c.name.c_str(),
                   format9(c.noise_sigma).c_str());
    }
  }

  const std::size_t n_cases = suite.cases.size();
  const std::size_t n_seeds = suite.seeds.size();
  SuiteResult result;
  result.runs.resize(n_cases * n_seeds);

  const int total = static_cast<int>(n_cases * n_seeds);
  // Independent runs; each has its own seed, so any schedule gives the
  // same per-run results and aggregation below is in fixed order.
#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) if (max_threads() > 1)
  for (int idx = 0; idx < total; ++idx) {
    const std::size_t ci = static_cast<std::size_t>(idx) / n_seeds;
    const std::size_t si = static_cast<std::size_t>(idx) % n_seeds;
    const SuiteCase& c = suite.cases[ci];
    const PreparedCase& prep = prepared[ci];

    RunRecord& rec = result.runs[static_cast<std::size_t>(idx)];
    rec.case_name = c.name;
    rec.seed = suite.seeds[si];
    rec.noise_sigma = c.noise_sigma;

    RunOptions opt;
    opt.mode = suite.mode;
    opt.cfg = suite.cfg;
    opt.cfg.seed = suite.seeds[si];
    opt.control_ref = prep.sc.control_ref;
    opt.control_sensed = prep.sc.control_sensed;
    opt.corner_params = suite.corner_params;
    opt.rmse_threshold = suite.rmse_threshold;
    if (suite.mode == Mode::semi_automatic) {
      opt.ref_points = prep.semi_ref;
      opt.sensed_points = prep.semi_sensed;
    }

    if (suite.mode == Mode::fully_automatic) opt.sensed_valid = prep.sc.sensed_mask;

    try {
      RunDiagnostics diag;
      rec.report = run_registration(prep.sc.reference, prep.sc.sensed, opt, &diag);
      rec.phase1_histories = std::move(diag.phase1_histories);
    } catch (const error& e) {
      rec.failure = e.what();
    }

    if (log_level() >= 1) {
#pragma omp critical(affreg_suite_log)
      std::fprintf(stderr, "[suite] %s seed %llu: %s\n", c.name.c_str(),
                   static_cast<unsigned long long>(rec.seed),
                   rec.failure.empty()
                       ? (std::string("rmse ") + format9(rec.report.rmse) +
                          (rec.report.success ? " ok" : " miss"))
                             .c_str()
                       : rec.failure.c_str());
    }
  }

  return aggregate_suite(suite, std::move(result.runs));
}

SuiteResult aggregate_suite(const SuiteConfig& suite, std::vector<RunRecord> runs) {
  const std::size_t n_cases = suite.cases.size();
  const std::size_t n_seeds = suite.seeds.size();
  if (runs.size() != n_cases * n_seeds) {
    throw config_error("aggregate_suite: expected one record per (case, seed)");
  }
  SuiteResult result;
  result.runs = std::move(runs);

  // Aggregates in run order over the 9-digit-rounded values the CSV rows
  // carry, so recomputing from the rows reproduces them exactly.
  int total_success = 0;
  std::vector<std::pair<double, std::pair<int, int>>> by_sigma;  // sigma -> (success, runs)
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    CaseStats stats;
    stats.name = suite.cases[ci].name;
    stats.noise_sigma = suite.cases[ci].noise_sigma;
    double sum = 0.0;
    int scored = 0;
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const RunRecord& rec = result.runs[ci * n_seeds + si];
      ++stats.runs;
      if (rec.report.success) ++total_success;
      if (rec.report.success) stats.success_rate += 1.0;
      if (rec.failure.empty() && std::isfinite(rec.report.rmse)) {
        sum += round9(rec.report.rmse);
        ++scored;
      }
    }
    if (scored > 0) {
      const double mean = sum / scored;
      double sq = 0.0;
      for (std::size_t si = 0; si < n_seeds; ++si) {
        const RunRecord& rec = result.runs[ci * n_seeds + si];
        if (rec.failure.empty() && std::isfinite(rec.report.rmse)) {
          const double d = round9(rec.report.rmse) - mean;
          sq += d * d;
        }
      }
      stats.avg_rmse = round9(mean);
      stats.sigma_rmse = round9(std::sqrt(sq / scored));
    }
    stats.success_rate = round9(stats.success_rate / stats.runs);

    auto it = std::find_if(by_sigma.begin(), by_sigma.end(),
                           [&](const auto& p) { return p.first == stats.noise_sigma; });
    if (it == by_sigma.end()) {
      by_sigma.push_back({stats.noise_sigma, {0, 0}});
      it = std::prev(by_sigma.end());
    }
    for (std::size_t si = 0; si < n_seeds; ++si) {
      if (result.runs[ci * n_seeds + si].report.success) ++it->second.first;
      ++it->second.second;
    }
    result.cases.push_back(std::move(stats));
  }

  result.success_rate = round9(static_cast<double>(total_success) / result.runs.size());
  std::sort(by_sigma.begin(), by_sigma.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [sigma, counts] : by_sigma) {
    result.success_by_sigma.push_back(
        {sigma, round9(static_cast<double>(counts.first) / counts.second)});
  }
  return result;
}

void save_runs_csv(const SuiteResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write runs CSV: " + path.string());
  out << "case,seed,noise_sigma,rmse,ncc,success,phase1_generations,phase2_generations,"
         "wall_time\n";
  for (const RunRecord& rec : result.runs) {
    out << rec.case_name << ',' << rec.seed << ',' << format9(rec.noise_sigma) << ','
        << format9(round9(rec.report.rmse)) << ',' << format9(round9(rec.report.ncc)) << ','
        << (rec.report.success ? 1 : 0) << ',' << rec.report.phase1_generations << ','
        << rec.report.phase2_generations << ',' << format9(round9(rec.report.wall_time)) << '\n';
  }
}

void save_suite_csv(const SuiteResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write suite CSV: " + path.string());
  out << "image,avg_rmse,sigma_rmse\n";
  for (const CaseStats& stats : result.cases) {
    out << stats.name << ',' << format9(stats.avg_rmse) << ',' << format9(stats.sigma_rmse)
        << '\n';
  }
  out << "success_rate," << format9(result.success_rate) << '\n';
}

nlohmann::ordered_json suite_summary_json(const SuiteConfig& suite, const SuiteResult& result) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(suite.mode);
  j["image_size"] = suite.image_size;
  j["grid"] = suite.grid;
  j["rmse_threshold"] = round9(suite.rmse_threshold);
  j["runs"] = result.runs.size();
  j["success_rate"] = round9(result.success_rate);
  nlohmann::ordered_json by_sigma;
  for (const auto& [sigma, rate] : result.success_by_sigma) {
    by_sigma[format9(sigma)] = round9(rate);
  }
  j["success_by_noise_sigma"] = std::move(by_sigma);
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const CaseStats& stats : result.cases) {
    nlohmann::ordered_json jc;
    jc["name"] = stats.name;
    jc["noise_sigma"] = round9(stats.noise_sigma);
    jc["avg_rmse"] = round9(stats.avg_rmse);
    jc["sigma_rmse"] = round9(stats.sigma_rmse);
    jc["success_rate"] = round9(stats.success_rate);
    jc["runs"] = stats.runs;
    cases.push_back(std::move(jc));
  }
  j["cases"] = std::move(cases);
  j["ga"] = nlohmann::ordered_json(to_json(suite.cfg));
  return j;
}

}  // namespace affreg
