#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affreg/points.hpp"
#include "affreg/rng.hpp"
#include "affreg/similarity.hpp"
#include "affreg/transform.hpp"

namespace affreg {

struct Individual {
  Transform genes;
  FitnessVector fitness;
  int age = 0;             // generations since creation
  bool evaluated = false;  // fitness cache flag; evaluation is pure, so
                           // cached values equal recomputed ones exactly
};

struct GAConfig {
  int population_size = 100;
  int tournament_size = 3;
  int elitism_count = 2;
  double crossover_rate = 0.9;
  double blend_alpha = 0.3;
  double mutation_rate = 0.1;        // per gene
  double mutation_sigma_frac = 0.05; // of the gene's bound range
  int stall_generations = 30;
  double rel_improvement_eps = 1e-4;
  double phase1_dist_target = 0.5;   // pixels
  int max_generations = 500;
  std::uint64_t seed = 1;

  void validate() const;  // throws config_error
};

nlohmann::json to_json(const GAConfig& cfg);
GAConfig ga_config_from_json(const nlohmann::json& j, const GAConfig& base = {});

struct Population {
  std::vector<Individual> individuals;
  int generation = 0;
  std::vector<double> best_history;  // best median_dist after each evaluation
};

// population_size individuals sampled uniformly per gene within bounds.
Population init_population(const GAConfig& cfg, const Bounds& bounds, Rng& rng);

// Best (valid beats invalid, then lowest median_dist) of tournament_size
// uniform draws with replacement.
const Individual& tournament_select(const Population& pop, int tournament_size, Rng& rng);

// BLX-alpha: per gene, two independent samples from
// [min - alpha*d, max + alpha*d] with d = |a - b|, clamped to bounds.
std::pair<Individual, Individual> crossover_blend(const Individual& a, const Individual& b,
                                                  double alpha, Rng& rng, const Bounds& bounds);

// Each gene independently perturbed with probability mutation_rate by
// Gaussian noise of sigma = mutation_sigma_frac * bound range, clamped.
Individual mutate(const Individual& ind, const GAConfig& cfg, Rng& rng, const Bounds& bounds);

// Evaluates median distance for every uncached individual. Parallel over
// individuals when max_threads() > 1; values are identical either way.
void evaluate_phase1(Population& pop, const PointSet& ref_pts, const PointSet& sensed_pts,
                     const Point& center);

// Index of the best individual under phase-1 ordering (ties: lowest index).
std::size_t best_phase1_index(const Population& pop);

// Coarse estimation: evolves with elitism until the best median distance
// drops below phase1_dist_target, the relative improvement over
// stall_generations falls under rel_improvement_eps, or max_generations.
// The returned population is fully evaluated and carries best_history.
Population run_phase1(Population pop, const PointSet& ref_pts, const PointSet& sensed_pts,
                      const GAConfig& cfg, const Bounds& bounds, const Point& center, Rng& rng);

Population run_phase1(const PointSet& ref_pts, const PointSet& sensed_pts, const GAConfig& cfg,
                      const Bounds& bounds, const Point& center);

}  // namespace affreg
