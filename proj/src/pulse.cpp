#include "vibld/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vibld/errors.hpp"
#include "vibld/fft.hpp"

namespace vibld {

namespace {
const double fwhm_factor = 2.0 * std::sqrt(2.0 * std::numbers::ln2);
}

ChirpedPulseParams ChirpedPulseParams::from_genes(const std::array<double, gene_count>& g) {
  return {g[0], g[1], g[2], g[3], g[4]};
}

void ChirpedPulseParams::validate() const {
  if (!(amplitude > 0.0) || !(frequency > 0.0) || !(delay > 0.0) || !(width > 0.0)) {
    throw std::invalid_argument("pulse requires eps0, omega0, tau0, tau > 0");
  }
}

ParamRanges::ParamRanges(const std::array<GeneRange, ChirpedPulseParams::gene_count>& g)
    : genes(g) {
  validate();
}

void ParamRanges::validate() const {
  for (std::size_t k = 0; k < genes.size(); ++k) {
    const auto& r = genes[k];
    const std::string name = ChirpedPulseParams::gene_names[k];
    if (!(r.min < r.max)) throw std::invalid_argument("range for " + name + " needs min < max");
    if (!(r.min > 0.0)) throw std::invalid_argument("range for " + name + " must be positive");
  }
  if (genes[0].max > amplitude_ceiling * (1.0 + 1e-12)) {
    throw std::invalid_argument("eps0 range exceeds the ionization ceiling");
  }
}

bool ParamRanges::contains(const ChirpedPulseParams& p) const {
  const auto g = p.genes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!genes[k].contains(g[k])) return false;
  }
  return true;
}

ChirpedPulseParams ParamRanges::clip(const ChirpedPulseParams& p) const {
  auto g = p.genes();
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = genes[k].clip(g[k]);
  return ChirpedPulseParams::from_genes(g);
}

std::vector<std::string> ParamRanges::on_boundary(const ChirpedPulseParams& p) const {
  std::vector<std::string> names;
  const auto g = p.genes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k] == genes[k].min || g[k] == genes[k].max) {
      names.emplace_back(ChirpedPulseParams::gene_names[k]);
    }
  }
  return names;
}

double amplitude(const ChirpedPulseParams& p, double t) {
  const double s = t - p.delay;
  const double envelope = std::exp(-s * s / (2.0 * p.width * p.width));
  return p.amplitude * envelope * std::cos(p.frequency * s + 0.5 * p.chirp * s * s);
}

double instantaneous_frequency(const ChirpedPulseParams& p, double t) {
  return p.frequency + p.chirp * (t - p.delay);
}

double bandwidth(const ChirpedPulseParams& p) {
  if (!(p.width > 0.0)) throw std::invalid_argument("bandwidth requires tau > 0");
  const double tau2 = p.width * p.width;
  return fwhm_factor * std::sqrt(1.0 / tau2 + tau2 * p.chirp * p.chirp);
}

double spectrum(const ChirpedPulseParams& p, double omega) {
  const double tau4 = std::pow(p.width, 4);
  const double sigma = bandwidth(p);
  const double d = omega - p.frequency;
  return std::sqrt(tau4 / (1.0 + p.chirp * p.chirp * tau4)) * p.amplitude * p.amplitude *
         std::exp(-d * d / (2.0 * sigma * sigma));
}

SampledSpectrum fft_spectrum(const ChirpedPulseParams& p, double half_window_widths,
                             int min_samples_per_period) {
  p.validate();
  const double t0 = p.delay - half_window_widths * p.width;
  const double t1 = p.delay + half_window_widths * p.width;
  // Highest instantaneous frequency inside the window sets the sampling step.
  const double omega_top = std::max(std::abs(instantaneous_frequency(p, t0)),
                                    std::abs(instantaneous_frequency(p, t1))) +
                           bandwidth(p);
  const double dt = 2.0 * std::numbers::pi / (omega_top * min_samples_per_period);
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt)) + 1;

  FftBuffer buffer(n);
  for (std::size_t k = 0; k < n; ++k) {
    buffer[k] = amplitude(p, t0 + static_cast<double>(k) * dt);
  }
  buffer.forward();

  SampledSpectrum out;
  const std::size_t half = n / 2 + 1;
  out.omega.resize(half);
  out.intensity.resize(half);
  const double domega = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  for (std::size_t j = 0; j < half; ++j) {
    out.omega[j] = static_cast<double>(j) * domega;
    out.intensity[j] = std::norm(buffer[j] * dt);
  }
  return out;
}

double width_lower_bound(double delta_omega) {
  if (!(delta_omega > 0.0)) throw ChirpSignError("transition spread must be positive");
  const double k = 1.0 / (8.0 * std::numbers::ln2) - 1.0 / 36.0;
  return 1.0 / (delta_omega * std::sqrt(k));
}

HeuristicRanges heuristic_ranges(const VibrationalSpectrum& spectrum,
                                 const Eigen::MatrixXd& dipoles, std::span<const int> ladder,
                                 double lifetime_s, const HeuristicOptions& options) {
  if (ladder.size() < 2) throw std::invalid_argument("ladder needs at least two levels");
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (ladder[k] < 0 || ladder[k] >= spectrum.bound_count()) {
      throw std::out_of_range("ladder level " + std::to_string(ladder[k]) + " is not bound");
    }
    if (k > 0 && !(ladder[k] < ladder[k - 1])) {
      throw std::invalid_argument("ladder must be strictly descending");
    }
  }

  HeuristicRanges out;
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
    out.transitions.push_back(spectrum.transition(ladder[k], ladder[k + 1]));
  }
  for (std::size_t k = 1; k < out.transitions.size(); ++k) {
    if (!(out.transitions[k] > out.transitions[k - 1])) {
      std::ostringstream os;
      os << "transition " << ladder[k] << "->" << ladder[k + 1] << " (" << out.transitions[k]
         << ") does not exceed " << ladder[k - 1] << "->" << ladder[k] << " ("
         << out.transitions[k - 1] << "); no positive chirp follows this ladder";
      throw ChirpSignError(os.str());
    }
  }
  out.delta_omega = out.transitions.back() - out.transitions.front();
  if (!(out.delta_omega > 0.0)) {
    throw ChirpSignError("ladder transition energies do not increase; no positive chirp");
  }

  const double dw = out.delta_omega;
  const double first = out.transitions.front();
  const double tau_min = width_lower_bound(dw);
  const double tau_max = options.width_span * tau_min;
  out.width_lower_bound = tau_min;

  GeneRange width{tau_min, tau_max};
  GeneRange delay{options.delay_factor * tau_min, options.delay_factor * tau_max};
  GeneRange chirp{dw / (6.0 * tau_max), dw / (6.0 * tau_min)};
  // omega0 = omega_first + tau0 dw / (6 tau) with tau0 / tau spread one unit
  // around the delay factor.
  GeneRange frequency{first + (options.delay_factor - 1.0) * dw / 6.0,
                      first + (options.delay_factor + 1.0) * dw / 6.0};

  // Rabi period 1 / (eps d) of every ladder transition should fall inside the
  // width range.
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = 0.0;
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
    const double d = std::abs(dipoles(ladder[k], ladder[k + 1]));
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
  }
  if (!(d_max > 0.0)) throw HeuristicFailure("ladder transitions carry no dipole coupling");
  const double eps_lo = 1.0 / (d_max * tau_max);
  const double eps_hi = d_min > 0.0 ? std::min(amplitude_ceiling, 1.0 / (d_min * tau_min))
                                    : amplitude_ceiling;
  if (!(eps_lo < eps_hi)) {
    std::ostringstream os;
    os << "field amplitude range collapsed: Rabi condition needs eps0 >= " << eps_lo
       << " but the ceiling is " << eps_hi;
    throw HeuristicFailure(os.str());
  }
  GeneRange amp{eps_lo, eps_hi};

  out.lifetime_au = lifetime_s / units::time_au_seconds;
  if (!(delay.max < options.lifetime_margin * out.lifetime_au)) {
    std::ostringstream os;
    os << "pulse delay up to " << delay.max << " a.u. is not much shorter than the lifetime "
       << out.lifetime_au << " a.u.";
    throw HeuristicFailure(os.str());
  }

  out.ranges.genes = {amp, frequency, delay, width, chirp};
  out.ranges.validate();
  return out;
}

}  // namespace vibld
