#include "vibld/ga.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "vibld/errors.hpp"

namespace vibld {

void GaConfig::validate() const {
  if (population_size < 2) throw std::invalid_argument("population needs at least 2 members");
  if (generations < 1) throw std::invalid_argument("at least one generation is required");
  if (elite_count < 0 || elite_count >= population_size) {
    throw std::invalid_argument("elite count must be below the population size");
  }
  auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!probability(crossover_prob) || !probability(mutation_prob)) {
    throw std::invalid_argument("GA probabilities must lie in [0, 1]");
  }
  if (!(mutation_scale > 0.0)) throw std::invalid_argument("mutation scale must be positive");
  if (threads < 1) throw std::invalid_argument("thread count must be positive");
  ranges.validate();
}

SurrogateProblem::SurrogateProblem(ParamRanges ranges, ChirpedPulseParams center,
                                   double relative_width)
    : ranges_(ranges), center_(center), relative_width_(relative_width) {}

double SurrogateProblem::evaluate(const ChirpedPulseParams& p) const {
  const auto g = p.genes();
  const auto c = center_.genes();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double z = (g[k] - c[k]) / (relative_width_ * ranges_.genes[k].width());
    s += z * z;
  }
  return std::exp(-0.5 * s);
}

LadderProblem::LadderProblem(PropagationSetup setup,
                             std::shared_ptr<const VibrationalSpectrum> spectrum,
                             int initial_level, int target_level, double tail_widths)
    : setup_(std::move(setup)),
      spectrum_(std::move(spectrum)),
      initial_(initial_level),
      target_(target_level),
      tail_(tail_widths) {
  if (!spectrum_) throw std::invalid_argument("ladder problem needs a spectrum");
  const int n = spectrum_->bound_count();
  if (initial_ < 0 || initial_ >= n || target_ < 0 || target_ >= n) {
    throw std::out_of_range("initial and target levels must be bound");
  }
}

double LadderProblem::horizon(const ChirpedPulseParams& p) const {
  return p.delay + tail_ * p.width;
}

PropagationResult LadderProblem::run(const ChirpedPulseParams& p, int stride) const {
  SplitOperatorPropagator prop(setup_);
  const FieldFunction field = [p](double t) { return amplitude(p, t); };
  return prop.propagate(level_state(*spectrum_, initial_), field, horizon(p), stride,
                        spectrum_.get());
}

double LadderProblem::evaluate(const ChirpedPulseParams& p) const {
  SplitOperatorPropagator prop(setup_);
  const FieldFunction field = [p](double t) { return amplitude(p, t); };
  auto res = prop.propagate(level_state(*spectrum_, initial_), field, horizon(p),
                            std::numeric_limits<int>::max(), nullptr);
  const double j = population(res.final_state, *spectrum_, target_);
  if (!std::isfinite(j)) throw NumericalBlowup("non-finite fitness", res.steps);
  return std::clamp(j, 0.0, 1.0);
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double gaussian(Rng& rng, double sigma) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

}  // namespace

Population init_population(const ParamRanges& ranges, int n, Rng& rng) {
  ranges.validate();
  Population pop(static_cast<std::size_t>(n));
  for (auto& ind : pop) {
    std::array<double, ChirpedPulseParams::gene_count> g{};
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = ranges.genes[k].clip(uniform(rng, ranges.genes[k].min, ranges.genes[k].max));
    }
    ind.chromosome = ChirpedPulseParams::from_genes(g);
  }
  return pop;
}

Population init_population(const ParamRanges& ranges, int n, std::uint64_t seed) {
  Rng rng(seed);
  return init_population(ranges, n, rng);
}

std::size_t roulette_select(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw std::invalid_argument("roulette over an empty set");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) {
    return std::uniform_int_distribution<std::size_t>(0, weights.size() - 1)(rng);
  }
  const double x = unit(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (x < acc) return k;
  }
  // x landed on the upper edge through roundoff; return the last nonzero slot.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return k;
  }
  return weights.size() - 1;
}

std::size_t evaluate_population(Population& pop, const FitnessProblem& problem, int threads) {
  std::vector<std::size_t> pending;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    if (!pop[k].fitness) pending.push_back(k);
  }
  auto evaluate_one = [&](std::size_t k) {
    Individual& ind = pop[k];
    try {
      ind.fitness = problem.evaluate(ind.chromosome);
      ind.failed = false;
    } catch (const Error&) {
      ind.fitness = 0.0;
      ind.failed = true;
    }
  };

  const auto workers =
      static_cast<std::size_t>(std::clamp<int>(threads, 1, std::max<int>(1, pending.size())));
  if (workers <= 1) {
    for (std::size_t k : pending) evaluate_one(k);
    return pending.size();
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < pending.size(); i = next++) evaluate_one(pending[i]);
    });
  }
  pool.clear();
  return pending.size();
}

Population evolve_generation(const Population& pop, const GaConfig& cfg, Rng& rng,
                             bool* uniform_selection) {
  if (pop.empty()) throw std::invalid_argument("cannot evolve an empty population");
  std::vector<double> fitness(pop.size());
  for (std::size_t k = 0; k < pop.size(); ++k) {
    if (!pop[k].fitness) throw std::invalid_argument("evolve_generation needs evaluated members");
    fitness[k] = *pop[k].fitness;
  }
  const double mean = std::accumulate(fitness.begin(), fitness.end(), 0.0) /
                      static_cast<double>(fitness.size());

  // Survivors ranked by fitness; ties keep population order.
  std::vector<std::size_t> survivors;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    if (fitness[k] >= mean) survivors.push_back(k);
  }
  std::stable_sort(survivors.begin(), survivors.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

  const std::size_t elites = std::min<std::size_t>(static_cast<std::size_t>(cfg.elite_count),
                                                   survivors.size());
  const auto target = static_cast<std::size_t>(cfg.population_size);

  Population next;
  next.reserve(target);
  for (std::size_t s : survivors) {
    if (next.size() == target) break;
    next.push_back(pop[s]);
  }

  std::vector<double> weights;
  weights.reserve(survivors.size());
  for (std::size_t s : survivors) weights.push_back(fitness[s]);
  const bool uniform_parents = !(std::accumulate(weights.begin(), weights.end(), 0.0) > 0.0);
  if (uniform_selection != nullptr) *uniform_selection = uniform_parents;

  while (next.size() < target) {
    const auto& a = pop[survivors[roulette_select(weights, rng)]].chromosome;
    const auto& b = pop[survivors[roulette_select(weights, rng)]].chromosome;
    auto ga = a.genes();
    auto gb = b.genes();
    for (std::size_t k = 0; k < ga.size(); ++k) {
      if (unit(rng) < cfg.crossover_prob) std::swap(ga[k], gb[k]);
    }
    Individual child;
    child.chromosome = ChirpedPulseParams::from_genes(ga);
    next.push_back(child);
  }

  for (std::size_t k = elites; k < next.size(); ++k) {
    auto g = next[k].chromosome.genes();
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (unit(rng) < cfg.mutation_prob) {
        const auto& range = cfg.ranges.genes[j];
        g[j] = range.clip(g[j] + gaussian(rng, cfg.mutation_scale * range.width()));
      }
    }
    next[k].chromosome = ChirpedPulseParams::from_genes(g);
    next[k].fitness.reset();
    next[k].failed = false;
  }
  return next;
}

namespace {

GenerationSummary summarize(const Population& pop, int generation) {
  GenerationSummary s;
  s.generation = generation;
  s.best = -std::numeric_limits<double>::infinity();
  s.min = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& ind : pop) {
    const double j = *ind.fitness;
    total += j;
    s.min = std::min(s.min, j);
    if (j > s.best) {
      s.best = j;
      s.best_chromosome = ind.chromosome;
    }
    if (ind.failed) ++s.failures;
  }
  s.mean = total / static_cast<double>(pop.size());
  return s;
}

}  // namespace

OptimizationResult optimize(const GaConfig& cfg, const FitnessProblem& problem,
                            const GenerationObserver& observer) {
  cfg.validate();
  Rng rng(cfg.seed);
  OptimizationResult out;
  Population pop = init_population(cfg.ranges, cfg.population_size, rng);
  bool uniform = false;
  for (int g = 0; g < cfg.generations; ++g) {
    out.history.evaluations += evaluate_population(pop, problem, cfg.threads);
    GenerationSummary summary = summarize(pop, g);
    summary.uniform_selection = uniform;
    for (const auto& ind : pop) {
      if (!out.best.fitness || *ind.fitness > *out.best.fitness) out.best = ind;
    }
    if (observer) observer(summary);
    out.history.generations.push_back(summary);
    if (g + 1 < cfg.generations) pop = evolve_generation(pop, cfg, rng, &uniform);
  }
  out.final_population = std::move(pop);
  return out;
}

}  // namespace vibld
