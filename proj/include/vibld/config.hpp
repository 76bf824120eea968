#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vibld/curves.hpp"
#include "vibld/dvr.hpp"
#include "vibld/ga.hpp"
#include "vibld/propagator.hpp"
#include "vibld/pulse.hpp"

namespace vibld {

enum class Scheme { old, mld };

struct CurveSpec {
  std::string model; // morse | harmonic | tabulated   /   decaying | linear | constant | tabulated
  double p1 = 0.0, p2 = 0.0, p3 = 0.0; // model coefficients, see config docs
  std::filesystem::path file;
  int order = 3;
};

/// One scenario: grid, curves, absorber, pulse or GA settings, ladder, output.
struct RunConfig {
  std::string name = "custom";
  Scheme scheme = Scheme::old;
  int initial_level = 0;
  int target_level = 0;
  std::vector<int> ladder; // explicit for MLD; consecutive for OLD

  RadialGrid grid;
  CurveSpec potential;
  CurveSpec dipole;
  std::optional<CapSpec> cap;

  std::optional<double> time_step; // unset = automatic
  int sample_stride = 100;
  double tail_widths = 4.0;

  std::optional<ChirpedPulseParams> pulse;
  GaConfig ga;
  bool explicit_ranges = false;
  HeuristicOptions heuristics;

  std::filesystem::path output_dir = "out";

  /// Ladder, deriving the consecutive OLD ladder when none was given.
  std::vector<int> resolved_ladder() const;
  /// Structural invariants: i > f >= 0, ladder descends from i to f.
  void validate() const;
};

/// Built-in scenarios: old20, old24, mld20, mld24 (full grid, tabulated search
/// ranges and optimal chromosomes) and desk (reduced grid OLD 20 -> 10).
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Published outcome of a preset on the true curves, kept as reference
/// metadata only; the stand-in curves are not expected to reproduce it.
struct ReferenceOutcome {
  double target_population;
  double bound_population;
};
std::optional<ReferenceOutcome> preset_reference(const std::string& name);

/// Applies an INI file on top of `base`; unknown sections or keys are errors.
RunConfig load_config(const std::filesystem::path& path, RunConfig base);
RunConfig parse_config(const std::string& text, RunConfig base, const std::string& origin);

/// Canonical INI text of a config; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const RunConfig& config);

/// Pulse parameter files: an INI [pulse] section.
ChirpedPulseParams load_pulse(const std::filesystem::path& path);
std::string pulse_to_ini(const ChirpedPulseParams& p);

PotentialModel make_potential(const CurveSpec& spec, double reduced_mass);
DipoleCurve make_dipole(const CurveSpec& spec);

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_number(double x);

/// Stable 64-bit FNV-1a hash, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// Stand-in KRb a(3)Sigma+ constants.
namespace krb {
inline constexpr double reduced_mass = 49040.37998605697;   // 39K 87Rb, electron masses
inline constexpr double well_depth = 0.0011003549635416336; // 241.5 cm^-1
inline constexpr double equilibrium_distance = 11.0;
inline constexpr double morse_width = 0.343994399206917;    // gives lambda = 30.2
inline constexpr double dipole_scale = 0.1;
inline constexpr double dipole_range = 12.0;
inline constexpr double dipole_exponent = 4.0;
}  // namespace krb

}  // namespace vibld
