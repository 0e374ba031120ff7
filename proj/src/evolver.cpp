#include "affreg/evolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affreg/errors.hpp"
#include "affreg/threading.hpp"

namespace affreg {

void GAConfig::validate() const {
  if (population_size < 2) throw config_error("population_size must be at least 2");
  if (tournament_size < 1) throw config_error("tournament_size must be at least 1");
  if (elitism_count < 1 || elitism_count >= population_size) {
    throw config_error("elitism_count must satisfy 0 < elitism_count < population_size");
  }
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw config_error(std::string(name) + " must be in [0, 1]");
  };
  prob(crossover_rate, "crossover_rate");
  prob(mutation_rate, "mutation_rate");
  if (blend_alpha < 0.0) throw config_error("blend_alpha must be non-negative");
  if (mutation_sigma_frac < 0.0) throw config_error("mutation_sigma_frac must be non-negative");
  if (stall_generations < 1) throw config_error("stall_generations must be positive");
  if (rel_improvement_eps < 0.0) throw config_error("rel_improvement_eps must be non-negative");
  if (phase1_dist_target < 0.0) throw config_error("phase1_dist_target must be non-negative");
  if (max_generations < 1) throw config_error("max_generations must be positive");
}

nlohmann::json to_json(const GAConfig& cfg) {
  return nlohmann::json{{"population_size", cfg.population_size},
                        {"tournament_size", cfg.tournament_size},
                        {"elitism_count", cfg.elitism_count},
                        {"crossover_rate", cfg.crossover_rate},
                        {"blend_alpha", cfg.blend_alpha},
                        {"mutation_rate", cfg.mutation_rate},
                        {"mutation_sigma_frac", cfg.mutation_sigma_frac},
                        {"stall_generations", cfg.stall_generations},
                        {"rel_improvement_eps", cfg.rel_improvement_eps},
                        {"phase1_dist_target", cfg.phase1_dist_target},
                        {"max_generations", cfg.max_generations},
                        {"seed", cfg.seed}};
}

GAConfig ga_config_from_json(const nlohmann::json& j, const GAConfig& base) {
  GAConfig cfg = base;
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("population_size", cfg.population_size);
    get("tournament_size", cfg.tournament_size);
    get("elitism_count", cfg.elitism_count);
    get("crossover_rate", cfg.crossover_rate);
    get("blend_alpha", cfg.blend_alpha);
    get("mutation_rate", cfg.mutation_rate);
    get("mutation_sigma_frac", cfg.mutation_sigma_frac);
    get("stall_generations", cfg.stall_generations);
    get("rel_improvement_eps", cfg.rel_improvement_eps);
    get("phase1_dist_target", cfg.phase1_dist_target);
    get("max_generations", cfg.max_generations);
    get("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad GA config JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

double sample_gene(const Bounds::Interval& iv, Rng& rng) {
  return rng.uniform(iv.lo, iv.hi);
}

}  // namespace

Population init_population(const GAConfig& cfg, const Bounds& bounds, Rng& rng) {
  cfg.validate();
  bounds.validate();
  Population pop;
  pop.individuals.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    Individual ind;
    ind.genes.tx = sample_gene(bounds.tx, rng);
    ind.genes.ty = sample_gene(bounds.ty, rng);
    ind.genes.theta = sample_gene(bounds.theta, rng);
    ind.genes.scale = sample_gene(bounds.scale, rng);
    ind.genes.shear_x = sample_gene(bounds.shear_x, rng);
    ind.genes.shear_y = sample_gene(bounds.shear_y, rng);
    pop.individuals.push_back(ind);
  }
  return pop;
}

const Individual& tournament_select(const Population& pop, int tournament_size, Rng& rng) {
  const std::size_t n = pop.individuals.size();
  std::size_t best = rng.below(n);
  for (int i = 1; i < tournament_size; ++i) {
    const std::size_t cand = rng.below(n);
    if (phase1_better(pop.individuals[cand].fitness, pop.individuals[best].fitness)) {
      best = cand;
    }
  }
  return pop.individuals[best];
}

std::pair<Individual, Individual> crossover_blend(const Individual& a, const Individual& b,
                                                  double alpha, Rng& rng, const Bounds& bounds) {
  const std::array<double, 6> ga = {a.genes.tx,    a.genes.ty,      a.genes.theta,
                                    a.genes.scale, a.genes.shear_x, a.genes.shear_y};
  const std::array<double, 6> gb = {b.genes.tx,    b.genes.ty,      b.genes.theta,
                                    b.genes.scale, b.genes.shear_x, b.genes.shear_y};
  const auto ivs = bounds.as_array();

  std::array<double, 6> c1{}, c2{};
  for (std::size_t g = 0; g < 6; ++g) {
    const double lo = std::min(ga[g], gb[g]);
    const double hi = std::max(ga[g], gb[g]);
    const double d = hi - lo;
    const double slo = lo - alpha * d;
    const double shi = hi + alpha * d;
    c1[g] = std::clamp(rng.uniform(slo, shi), ivs[g].lo, ivs[g].hi);
    c2[g] = std::clamp(rng.uniform(slo, shi), ivs[g].lo, ivs[g].hi);
  }

  auto build = [](const std::array<double, 6>& g) {
    Individual ind;
    ind.genes = {g[0], g[1], g[2], g[3], g[4], g[5]};
    return ind;
  };
  return {build(c1), build(c2)};
}

Individual mutate(const Individual& ind, const GAConfig& cfg, Rng& rng, const Bounds& bounds) {
  Individual out = ind;
  const auto ivs = bounds.as_array();
  std::array<double*, 6> genes = {&out.genes.tx,    &out.genes.ty,      &out.genes.theta,
                                  &out.genes.scale, &out.genes.shear_x, &out.genes.shear_y};
  for (std::size_t g = 0; g < 6; ++g) {
    if (rng.uniform01() < cfg.mutation_rate) {
      const double sigma = cfg.mutation_sigma_frac * (ivs[g].hi - ivs[g].lo);
      const double next = std::clamp(*genes[g] + sigma * rng.gaussian(), ivs[g].lo, ivs[g].hi);
      if (next != *genes[g]) {
        *genes[g] = next;
        out.evaluated = false;
      }
    }
  }
  return out;
}

void evaluate_phase1(Population& pop, const PointSet& ref_pts, const PointSet& sensed_pts,
                     const Point& center) {
  const int n = static_cast<int>(pop.individuals.size());
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (max_threads() > 1)
  for (int i = 0; i < n; ++i) {
    Individual& ind = pop.individuals[static_cast<std::size_t>(i)];
    if (ind.evaluated) continue;
    try {
      ind.fitness.median_dist = median_distance(sensed_pts, ref_pts, ind.genes, center);
      ind.fitness.valid = true;
    } catch (const singular_transform_error&) {
      ind.fitness.median_dist = std::numeric_limits<double>::infinity();
      ind.fitness.valid = false;
    }
    ind.fitness.ncc = std::numeric_limits<double>::quiet_NaN();
    ind.evaluated = true;
  }
}

std::size_t best_phase1_index(const Population& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.individuals.size(); ++i) {
    if (phase1_better(pop.individuals[i].fitness, pop.individuals[best].fitness)) best = i;
  }
  return best;
}

namespace {

// Relative improvement of the best value over the trailing stall window.
bool stalled(const std::vector<double>& history, int stall_generations, double eps) {
  const std::size_t n = history.size();
  if (n < static_cast<std::size_t>(stall_generations) + 1) return false;
  const double prev = history[n - 1 - static_cast<std::size_t>(stall_generations)];
  const double cur = history[n - 1];
  if (!std::isfinite(prev) || !std::isfinite(cur)) return false;
  const double rel = (prev - cur) / std::max(prev, 1e-30);
  return rel < eps;
}

void breed_phase1(Population& pop, const GAConfig& cfg, const Bounds& bounds, Rng& rng) {
  std::vector<std::size_t> order(pop.individuals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&pop](std::size_t a, std::size_t b) {
    return phase1_better(pop.individuals[a].fitness, pop.individuals[b].fitness);
  });

  std::vector<Individual> next;
  next.reserve(pop.individuals.size());
  for (int e = 0; e < cfg.elitism_count; ++e) {
    Individual elite = pop.individuals[order[static_cast<std::size_t>(e)]];
    ++elite.age;
    next.push_back(std::move(elite));
  }

  while (next.size() < pop.individuals.size()) {
    const Individual& pa = tournament_select(pop, cfg.tournament_size, rng);
    const Individual& pb = tournament_select(pop, cfg.tournament_size, rng);
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
    next.push_back(std::move(c1));
    if (next.size() < pop.individuals.size()) {
      c2 = mutate(c2, cfg, rng, bounds);
      next.push_back(std::move(c2));
    }
  }

  pop.individuals = std::move(next);
}

}  // namespace

Population run_phase1(Population pop, const PointSet& ref_pts, const PointSet& sensed_pts,
                      const GAConfig& cfg, const Bounds& bounds, const Point& center, Rng& rng) {
  cfg.validate();
  if (ref_pts.size() < 3 || sensed_pts.size() < 3) {
    throw empty_point_set_error("run_phase1: needs at least 3 feature points per image");
  }

  for (;;) {
    evaluate_phase1(pop, ref_pts, sensed_pts, center);
    const Individual& best = pop.individuals[best_phase1_index(pop)];
    pop.best_history.push_back(best.fitness.valid
                                   ? best.fitness.median_dist
                                   : std::numeric_limits<double>::infinity());

    if (best.fitness.valid && best.fitness.median_dist < cfg.phase1_dist_target) break;
    if (stalled(pop.best_history, cfg.stall_generations, cfg.rel_improvement_eps)) break;
    if (pop.generation >= cfg.max_generations) break;

    breed_phase1(pop, cfg, bounds, rng);
    ++pop.generation;
  }
  return pop;
}

Population run_phase1(const PointSet& ref_pts, const PointSet& sensed_pts, const GAConfig& cfg,
                      const Bounds& bounds, const Point& center) {
  Rng rng(cfg.seed);
  Population pop = init_population(cfg, bounds, rng);
  return run_phase1(std::move(pop), ref_pts, sensed_pts, cfg, bounds, center, rng);
}

}  // namespace affreg
