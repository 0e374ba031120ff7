#include "affreg/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "affreg/errors.hpp"
#include "affreg/similarity.hpp"
#include "affreg/threading.hpp"
#include "affreg/warp.hpp"

namespace affreg {

bool dominates(const FitnessVector& a, const FitnessVector& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  if (a.median_dist > b.median_dist || a.ncc < b.ncc) return false;
  return a.median_dist < b.median_dist || a.ncc > b.ncc;
}

namespace {

void assign_crowding(std::vector<RankedIndividual>& ranked, const std::vector<std::size_t>& front) {
  if (front.size() == 1) {
    ranked[front[0]].crowding = std::numeric_limits<double>::infinity();
    return;
  }
  bool finite = true;
  for (std::size_t i : front) {
    const FitnessVector& f = ranked[i].individual.fitness;
    if (!std::isfinite(f.median_dist) || !std::isfinite(f.ncc)) {
      finite = false;
      break;
    }
  }
  if (!finite) {
    for (std::size_t i : front) ranked[i].crowding = 0.0;
    return;
  }

  auto accumulate_objective = [&ranked, &front](auto value_of) {
    std::vector<std::size_t> order = front;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = value_of(ranked[a]);
      const double vb = value_of(ranked[b]);
      if (va != vb) return va < vb;
      return ranked[a].index < ranked[b].index;
    });
    const double lo = value_of(ranked[order.front()]);
    const double hi = value_of(ranked[order.back()]);
    ranked[order.front()].crowding = std::numeric_limits<double>::infinity();
    ranked[order.back()].crowding = std::numeric_limits<double>::infinity();
    if (hi <= lo) return;  // constant objective: boundaries already infinite
    for (std::size_t i = 1; i + 1 < order.size(); ++i) {
      ranked[order[i]].crowding +=
          (value_of(ranked[order[i + 1]]) - value_of(ranked[order[i - 1]])) / (hi - lo);
    }
  };

  for (std::size_t i : front) ranked[i].crowding = 0.0;
  accumulate_objective([](const RankedIndividual& r) { return r.individual.fitness.median_dist; });
  accumulate_objective([](const RankedIndividual& r) { return r.individual.fitness.ncc; });
}

}  // namespace

std::vector<RankedIndividual> nondominated_sort(const std::vector<Individual>& pop) {
  const std::size_t n = pop.size();
  std::vector<RankedIndividual> ranked(n);
  for (std::size_t i = 0; i < n; ++i) {
    ranked[i].individual = pop[i];
    ranked[i].index = i;
  }
  if (n == 0) return ranked;

  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> domination_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(pop[i].fitness, pop[j].fitness)) {
        dominated[i].push_back(j);
        ++domination_count[j];
      } else if (dominates(pop[j].fitness, pop[i].fitness)) {
        dominated[j].push_back(i);
        ++domination_count[i];
      }
    }
  }

  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (domination_count[i] == 0) {
      ranked[i].front = 0;
      current.push_back(i);
    }
  }

  int front = 0;
  while (!current.empty()) {
    assign_crowding(ranked, current);
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated[i]) {
        if (--domination_count[j] == 0) {
          ranked[j].front = front + 1;
          next.push_back(j);
        }
      }
    }
    current = std::move(next);
    ++front;
  }

  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedIndividual& a, const RankedIndividual& b) {
                     if (a.front != b.front) return a.front < b.front;
                     if (a.crowding != b.crowding) return a.crowding > b.crowding;
                     return a.index < b.index;
                   });
  return ranked;
}

Phase2Evaluator::Phase2Evaluator(const Image& ref_img, const Image& sensed_img,
                                 const PointSet& ref_pts, const PointSet& sensed_pts, Point center,
                                 double min_overlap_frac)
    : ref_img_(ref_img), sensed_img_(sensed_img), ref_pts_(ref_pts), sensed_pts_(sensed_pts),
      center_(center), min_overlap_frac_(min_overlap_frac) {}

void Phase2Evaluator::evaluate(std::vector<Individual>& individuals) const {
  const int n = static_cast<int>(individuals.size());
#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) if (max_threads() > 1)
  for (int i = 0; i < n; ++i) {
    Individual& ind = individuals[static_cast<std::size_t>(i)];
    if (ind.evaluated) continue;

    // Per-thread warp scratch; the kernels run serially here because
    // parallelism is across individuals.
    static thread_local MaskedImage scratch;
    if (scratch.width() != ref_img_.width() || scratch.height() != ref_img_.height()) {
      scratch = MaskedImage(ref_img_.width(), ref_img_.height());
    }

    try {
      ind.fitness.median_dist = median_distance(sensed_pts_, ref_pts_, ind.genes, center_);
      const AffineMatrix inv = invert(ind.genes, center_);
      pullback_serial(sensed_img_, inv, scratch);
      ind.fitness.ncc = ncc_serial(ref_img_, scratch, min_overlap_frac_);
      ind.fitness.valid = true;
    } catch (const singular_transform_error&) {
      ind.fitness.valid = false;
      ind.fitness.ncc = std::numeric_limits<double>::quiet_NaN();
    } catch (const insufficient_overlap_error&) {
      ind.fitness.valid = false;
      ind.fitness.ncc = std::numeric_limits<double>::quiet_NaN();
    } catch (const degenerate_signal_error&) {
      ind.fitness.valid = false;
      ind.fitness.ncc = std::numeric_limits<double>::quiet_NaN();
    }
    ind.evaluated = true;
  }
}

namespace {

double best_front0_ncc(const std::vector<RankedIndividual>& ranked) {
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (const RankedIndividual& r : ranked) {
    if (r.front != 0) break;  // ranked is ordered by front
    if (r.individual.fitness.valid) {
      best = std::max(best, r.individual.fitness.ncc);
      found = true;
    }
  }
  return found ? best : -std::numeric_limits<double>::infinity();
}

bool ncc_stalled(const std::vector<double>& history, int stall_generations, double eps) {
  const std::size_t n = history.size();
  if (n < static_cast<std::size_t>(stall_generations) + 1) return false;
  const double prev = history[n - 1 - static_cast<std::size_t>(stall_generations)];
  const double cur = history[n - 1];
  if (!std::isfinite(prev) || !std::isfinite(cur)) return false;
  const double rel = (cur - prev) / std::max(std::abs(prev), 1e-30);
  return rel < eps;
}

// Binary tournament on (front, crowding, index), the usual crowded
// comparison.
const Individual& crowded_tournament(const std::vector<RankedIndividual>& ranked,
                                     int tournament_size, Rng& rng) {
  const std::size_t n = ranked.size();
  std::size_t best = rng.below(n);
  auto better = [&ranked](std::size_t a, std::size_t b) {
    if (ranked[a].front != ranked[b].front) return ranked[a].front < ranked[b].front;
    if (ranked[a].crowding != ranked[b].crowding) return ranked[a].crowding > ranked[b].crowding;
    return ranked[a].index < ranked[b].index;
  };
  for (int i = 1; i < tournament_size; ++i) {
    const std::size_t cand = rng.below(n);
    if (better(cand, best)) best = cand;
  }
  return ranked[best].individual;
}

}  // namespace

Phase2Result run_phase2(Population seed_pop, const Image& ref_img, const Image& sensed_img,
                        const PointSet& ref_pts, const PointSet& sensed_pts, const GAConfig& cfg,
                        const Bounds& bounds, const Point& center, Rng& rng,
                        double min_overlap_frac) {
  cfg.validate();
  Phase2Evaluator evaluator(ref_img, sensed_img, ref_pts, sensed_pts, center, min_overlap_frac);

  std::vector<Individual> individuals = std::move(seed_pop.individuals);
  for (Individual& ind : individuals) ind.evaluated = false;  // phase-1 cache lacks ncc
  evaluator.evaluate(individuals);

  Phase2Result result;
  for (;;) {
    std::vector<RankedIndividual> ranked = nondominated_sort(individuals);
    result.best_ncc_history.push_back(best_front0_ncc(ranked));

    if (ncc_stalled(result.best_ncc_history, cfg.stall_generations, cfg.rel_improvement_eps) ||
        result.generations >= cfg.max_generations) {
      result.ranked = std::move(ranked);
      break;
    }

    std::vector<Individual> offspring;
    offspring.reserve(individuals.size());
    while (offspring.size() < individuals.size()) {
      const Individual& pa = crowded_tournament(ranked, cfg.tournament_size, rng);
      const Individual& pb = crowded_tournament(ranked, cfg.tournament_size, rng);
      Individual c1, c2;
      if (rng.uniform01() < cfg.crossover_rate) {
        std::tie(c1, c2) = crossover_blend(pa, pb, cfg.blend_alpha, rng, bounds);
      } else {
        c1 = pa;
        c2 = pb;
        c1.age = 0;
        c2.age = 0;
      }
      c1 = mutate(c1, cfg, rng, bounds);
      offspring.push_back(std::move(c1));
      if (offspring.size() < individuals.size()) {
        c2 = mutate(c2, cfg, rng, bounds);
        offspring.push_back(std::move(c2));
      }
    }
    evaluator.evaluate(offspring);

    std::vector<Individual> combined = individuals;
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    std::vector<RankedIndividual> combined_ranked = nondominated_sort(combined);

    individuals.clear();
    individuals.reserve(static_cast<std::size_t>(cfg.population_size));
    for (const RankedIndividual& r : combined_ranked) {
      if (individuals.size() >= static_cast<std::size_t>(cfg.population_size)) break;
      Individual survivor = r.individual;
      ++survivor.age;
      individuals.push_back(std::move(survivor));
    }

    ++result.generations;
  }

  return result;
}

const Individual& select_final(const std::vector<RankedIndividual>& ranked) {
  if (ranked.empty()) throw registration_failed_error("select_final: empty population");
  const RankedIndividual* best = nullptr;
  for (const RankedIndividual& r : ranked) {
    if (r.front != 0) break;
    if (!r.individual.fitness.valid) continue;
    if (best == nullptr) {
      best = &r;
      continue;
    }
    const FitnessVector& a = r.individual.fitness;
    const FitnessVector& b = best->individual.fitness;
    if (a.ncc > b.ncc || (a.ncc == b.ncc && a.median_dist < b.median_dist) ||
        (a.ncc == b.ncc && a.median_dist == b.median_dist && r.index < best->index)) {
      best = &r;
    }
  }
  if (best == nullptr) {
    throw registration_failed_error("select_final: no valid Pareto-optimal individual");
  }
  return best->individual;
}

void save_front_csv(const std::vector<RankedIndividual>& ranked,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write front CSV: " + path.string());
  out << "median_dist,ncc,tx,ty,theta,scale,shear_x,shear_y\n";
  char buf[256];
  for (const RankedIndividual& r : ranked) {
    if (r.front != 0) break;
    const FitnessVector& f = r.individual.fitness;
    const Transform& t = r.individual.genes;
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", f.median_dist,
                  f.ncc, t.tx, t.ty, t.theta, t.scale, t.shear_x, t.shear_y);
    out << buf;
  }
}

}  // namespace affreg
