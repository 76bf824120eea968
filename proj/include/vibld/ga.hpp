#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "vibld/propagator.hpp"
#include "vibld/pulse.hpp"

namespace vibld {

using Rng = std::mt19937_64;

struct Individual {
  ChirpedPulseParams chromosome;
  std::optional<double> fitness; // unset until evaluated
  bool failed = false;           // propagation blew up, fitness forced to 0
};

using Population = std::vector<Individual>;

struct GaConfig {
  int population_size = 40;
  int generations = 10;
  int elite_count = 5;
  double crossover_prob = 0.25;
  double mutation_prob = 0.9;
  double mutation_scale = 0.1; // Gaussian sigma as a fraction of the gene range
  std::uint64_t seed = 0;
  int threads = 1;
  ParamRanges ranges;

  void validate() const;
};

struct GenerationSummary {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double min = 0.0;
  ChirpedPulseParams best_chromosome;
  int failures = 0;
  bool uniform_selection = false; // every survivor had zero fitness
};

struct GaHistory {
  std::vector<GenerationSummary> generations;
  std::size_t evaluations = 0;
};

/// Objective maximized by the GA. evaluate() is called concurrently and must
/// not mutate shared state.
class FitnessProblem {
 public:
  virtual ~FitnessProblem() = default;
  virtual double evaluate(const ChirpedPulseParams& p) const = 0;
};

/// Analytic test objective exp(-sum_k z_k^2 / 2), z_k the distance of gene k
/// from `center` in units of `relative_width` times its range width. Peak 1.
class SurrogateProblem : public FitnessProblem {
 public:
  SurrogateProblem(ParamRanges ranges, ChirpedPulseParams center, double relative_width = 0.75);
  double evaluate(const ChirpedPulseParams& p) const override;
  const ChirpedPulseParams& center() const { return center_; }

 private:
  ParamRanges ranges_;
  ChirpedPulseParams center_;
  double relative_width_;
};

/// J = |<f|Psi(t_max)>|^2 after propagating level i under the pulse.
class LadderProblem : public FitnessProblem {
 public:
  LadderProblem(PropagationSetup setup, std::shared_ptr<const VibrationalSpectrum> spectrum,
                int initial_level, int target_level, double tail_widths = 4.0);

  double evaluate(const ChirpedPulseParams& p) const override;
  /// Default propagation horizon tau0 + tail_widths * tau.
  double horizon(const ChirpedPulseParams& p) const;
  /// Full propagation with observables every `stride` steps.
  PropagationResult run(const ChirpedPulseParams& p, int stride) const;

  const PropagationSetup& setup() const { return setup_; }
  const VibrationalSpectrum& spectrum() const { return *spectrum_; }
  int initial_level() const { return initial_; }
  int target_level() const { return target_; }

 private:
  PropagationSetup setup_;
  std::shared_ptr<const VibrationalSpectrum> spectrum_;
  int initial_;
  int target_;
  double tail_;
};

Population init_population(const ParamRanges& ranges, int n, Rng& rng);
Population init_population(const ParamRanges& ranges, int n, std::uint64_t seed);

/// Index drawn with probability proportional to weight; uniform when every
/// weight is zero.
std::size_t roulette_select(std::span<const double> weights, Rng& rng);

/// Evaluates every individual without a fitness. Results are independent of
/// `threads`. Returns the number of evaluations performed.
std::size_t evaluate_population(Population& pop, const FitnessProblem& problem, int threads);

/// Elimination below the mean fitness, elitism, roulette crossover refill and
/// Gaussian mutation of all non-elite members. Elites keep their fitness; all
/// other members come back unevaluated.
Population evolve_generation(const Population& pop, const GaConfig& cfg, Rng& rng,
                             bool* uniform_selection = nullptr);

struct OptimizationResult {
  Individual best;
  GaHistory history;
  Population final_population;
};

using GenerationObserver = std::function<void(const GenerationSummary&)>;

OptimizationResult optimize(const GaConfig& cfg, const FitnessProblem& problem,
                            const GenerationObserver& observer = {});

}  // namespace vibld
