#pragma once

#include <filesystem>
#include <vector>

#include "affreg/evolver.hpp"
#include "affreg/image.hpp"

namespace affreg {

struct RankedIndividual {
  Individual individual;
  int front = 0;           // 0 = Pareto-optimal
  double crowding = 0.0;   // objective-space diversity, boundaries get +inf
  std::size_t index = 0;   // position in the population the sort was given
};

// true iff a is no worse than b in both objectives (median_dist minimized,
// ncc maximized) and strictly better in at least one. A valid vector
// dominates any invalid one; invalid never dominates.
bool dominates(const FitnessVector& a, const FitnessVector& b);

// NSGA-II fast non-dominated sort plus per-front crowding distance.
// Returned list is ordered by (front, crowding descending, input index).
std::vector<RankedIndividual> nondominated_sort(const std::vector<Individual>& pop);

// Evaluates both objectives: median feature distance, and NCC of the
// warped sensed image against the reference. Guard failures (insufficient
// overlap, degenerate signal, singular transform) mark the individual
// invalid instead of aborting the run.
class Phase2Evaluator {
 public:
  Phase2Evaluator(const Image& ref_img, const Image& sensed_img, const PointSet& ref_pts,
                  const PointSet& sensed_pts, Point center,
                  double min_overlap_frac = kDefaultMinOverlapFrac);

  // Fills fitness for every uncached individual; parallel across
  // individuals when max_threads() > 1 with identical results.
  void evaluate(std::vector<Individual>& individuals) const;

 private:
  const Image& ref_img_;
  const Image& sensed_img_;
  const PointSet& ref_pts_;
  const PointSet& sensed_pts_;
  Point center_;
  double min_overlap_frac_;
};

struct Phase2Result {
  std::vector<RankedIndividual> ranked;   // final population, ranked
  int generations = 0;
  std::vector<double> best_ncc_history;   // best front-0 ncc per generation
};

// Multi-objective refinement seeded with the phase-1 population. Survival
// keeps the best population_size of parents plus offspring by
// (front, crowding); stops when the best front-0 ncc improves by less than
// rel_improvement_eps over stall_generations, or at max_generations.
Phase2Result run_phase2(Population seed_pop, const Image& ref_img, const Image& sensed_img,
                        const PointSet& ref_pts, const PointSet& sensed_pts, const GAConfig& cfg,
                        const Bounds& bounds, const Point& center, Rng& rng,
                        double min_overlap_frac = kDefaultMinOverlapFrac);

// The front-0 member with the best NCC; ties broken by smaller
// median_dist, then lowest index. Throws registration_failed_error when
// front 0 holds no valid member.
const Individual& select_final(const std::vector<RankedIndividual>& ranked);

// Front-0 rows as CSV: median_dist, ncc, then the six genes.
void save_front_csv(const std::vector<RankedIndividual>& ranked,
                    const std::filesystem::path& path);

}  // namespace affreg
