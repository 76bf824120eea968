#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vibld/dvr.hpp"

namespace vibld {

/// Five-gene chromosome of a linearly chirped Gaussian pulse, atomic units.
struct ChirpedPulseParams {
  double amplitude = 0.0; // eps0
  double frequency = 0.0; // omega0
  double delay = 0.0;     // tau0, time of the envelope peak
  double width = 0.0;     // tau, Gaussian standard deviation
  double chirp = 0.0;     // C = d omega / dt

  static constexpr std::size_t gene_count = 5;
  static constexpr std::array<const char*, gene_count> gene_names{"eps0", "omega0", "tau0", "tau",
                                                                  "chirp"};

  std::array<double, gene_count> genes() const { return {amplitude, frequency, delay, width, chirp}; }
  static ChirpedPulseParams from_genes(const std::array<double, gene_count>& g);

  /// Throws std::invalid_argument unless eps0, omega0, tau0, tau > 0.
  void validate() const;

  bool operator==(const ChirpedPulseParams&) const = default;
};

struct GeneRange {
  double min = 0.0;
  double max = 0.0;
  double width() const { return max - min; }
  bool contains(double x) const { return x >= min && x <= max; }
  double clip(double x) const { return x < min ? min : (x > max ? max : x); }
};

/// Search box for the five genes, indexed like ChirpedPulseParams::genes().
struct ParamRanges {
  std::array<GeneRange, ChirpedPulseParams::gene_count> genes;

  ParamRanges() = default;
  explicit ParamRanges(const std::array<GeneRange, ChirpedPulseParams::gene_count>& g);

  const GeneRange& amplitude() const { return genes[0]; }
  const GeneRange& frequency() const { return genes[1]; }
  const GeneRange& delay() const { return genes[2]; }
  const GeneRange& width() const { return genes[3]; }
  const GeneRange& chirp() const { return genes[4]; }

  /// min < max for every gene, positive bounds, eps0 at most the ceiling.
  void validate() const;
  bool contains(const ChirpedPulseParams& p) const;
  ChirpedPulseParams clip(const ChirpedPulseParams& p) const;
  /// Genes of p sitting on a range boundary (names).
  std::vector<std::string> on_boundary(const ChirpedPulseParams& p) const;
};

/// Field amplitudes above this risk ionizing the molecule.
inline constexpr double amplitude_ceiling = 1e-2;

double amplitude(const ChirpedPulseParams& p, double t);
double instantaneous_frequency(const ChirpedPulseParams& p, double t);

/// FWHM-style spectral bandwidth 2 sqrt(2 ln 2) sqrt(1/tau^2 + tau^2 C^2).
double bandwidth(const ChirpedPulseParams& p);

/// Analytic optical spectrum sqrt(tau^4 / (1 + C^2 tau^4)) eps0^2
/// exp(-(w - w0)^2 / (2 sigma^2)) with sigma = bandwidth(p).
double spectrum(const ChirpedPulseParams& p, double omega);

/// Spectral intensity |FT eps(t)|^2 of the sampled pulse on a uniform
/// frequency grid (FFT of eps(t) over tau0 +- half_window_widths * tau).
struct SampledSpectrum {
  std::vector<double> omega;
  std::vector<double> intensity;
};
SampledSpectrum fft_spectrum(const ChirpedPulseParams& p, double half_window_widths = 8.0,
                             int min_samples_per_period = 16);

/// Heuristic search box built from the level structure of a descent ladder.
struct HeuristicRanges {
  ParamRanges ranges;
  std::vector<double> transitions; // omega of each ladder step, top first
  double delta_omega = 0.0;        // last minus first transition
  double width_lower_bound = 0.0;  // tau from sigma ~ delta_omega with C = delta_omega / 6 tau
  double lifetime_au = 0.0;
};

struct HeuristicOptions {
  double width_span = 10.0;   // tau in [tau_min, width_span * tau_min]
  double delay_factor = 3.0;  // tau0 ~ delay_factor * tau
  double lifetime_margin = 1e-2; // require tau0_max < margin * lifetime
};

/// Ladder: strictly descending level list from the initial to the target level,
/// with strictly increasing transition energies. `lifetime_s` is the radiative
/// lifetime of the initial level in seconds (may be +inf).
HeuristicRanges heuristic_ranges(const VibrationalSpectrum& spectrum,
                                 const Eigen::MatrixXd& dipoles, std::span<const int> ladder,
                                 double lifetime_s, const HeuristicOptions& options = {});

/// Tau lower bound from 2 sqrt(2 ln 2) sqrt(1/tau^2 + dw^2/36) = dw.
double width_lower_bound(double delta_omega);

}  // namespace vibld
