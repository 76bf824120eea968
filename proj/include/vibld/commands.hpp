#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibld/config.hpp"

namespace vibld {

/// A config resolved into curves and the bound spectrum on its grid.
struct Scenario {
  RunConfig config;
  PotentialModel potential;
  DipoleCurve dipole;
  std::shared_ptr<const VibrationalSpectrum> spectrum;
  Eigen::MatrixXd dipoles; // signed <v|D|v'>
  Eigen::MatrixXd sdme;
  std::vector<int> ladder;
};

Scenario prepare_scenario(const RunConfig& config);

/// Throws ChirpSignError unless the ladder's transition energies increase
/// strictly; throws ConfigError when a rung is not a bound level.
void check_ladder(const Scenario& scenario);

/// Peak field the propagation has to handle, used by the automatic step.
PropagationSetup scenario_setup(const Scenario& scenario, double max_field);

struct RangeChoice {
  ParamRanges ranges;
  std::optional<HeuristicRanges> heuristic; // set when derived from the spectrum
};

/// Explicit [ranges] when given, otherwise the heuristic box for the ladder.
RangeChoice resolve_ranges(const Scenario& scenario);

/// Lifetime of the initial level in seconds.
double initial_lifetime(const Scenario& scenario);

struct SpectrumRequest {
  double omega_min = 0.0;
  double omega_max = 0.0;
  int points = 2001;
  bool fft = false;
};

/// Every command creates `out`, writes its data files plus summary.json and
/// manifest.json, and returns the summary.
nlohmann::json cmd_eigensolve(const RunConfig& config, const std::filesystem::path& out,
                              bool write_wavefunctions = false);
nlohmann::json cmd_propagate(const RunConfig& config, const ChirpedPulseParams& pulse,
                             const std::filesystem::path& out);
nlohmann::json cmd_optimize(const RunConfig& config, const std::filesystem::path& out,
                            bool surrogate = false, std::ostream* log = nullptr);
nlohmann::json cmd_pulse_spectrum(const ChirpedPulseParams& pulse, const SpectrumRequest& request,
                                  const std::filesystem::path& out);

/// Time of maximum population of each listed level in a record.
std::vector<double> peak_times(const PropagationRecord& record, const std::vector<int>& levels);

/// Versions of the numerical libraries linked in.
nlohmann::json library_versions();

inline constexpr const char* version = "1.0.0";

}  // namespace vibld
