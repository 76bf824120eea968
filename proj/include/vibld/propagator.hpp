#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "vibld/curves.hpp"
#include "vibld/dvr.hpp"
#include "vibld/fft.hpp"

namespace vibld {

/// Quadratic absorber -i eta (R - R0)^2 beyond R0.
struct CapSpec {
  double onset = 0.0;    // R0, bohr
  double strength = 0.0; // eta, hartree / bohr^2

  void validate(const RadialGrid& grid) const;
};

std::complex<double> cap_value(const CapSpec& cap, double r);

struct WavefunctionState {
  Eigen::VectorXcd psi;
  double time = 0.0;

  /// dR * sum |psi|^2
  double norm(double dr) const { return dr * psi.squaredNorm(); }
};

/// Real eigenfunction of level v as a complex state at t = 0.
WavefunctionState level_state(const VibrationalSpectrum& spectrum, int v);

/// Electric field eps(t) in atomic units.
using FieldFunction = std::function<double(double)>;

struct PopulationSnapshot {
  Eigen::VectorXd levels; // p_v = |<v|Psi>|^2 for every bound level
  double total_bound = 0.0;
  double norm = 0.0;
  double dissociation = 0.0; // 1 - norm
};

PopulationSnapshot populations(const WavefunctionState& state, const VibrationalSpectrum& spectrum);

/// |<v|Psi>|^2 for one level.
double population(const WavefunctionState& state, const VibrationalSpectrum& spectrum, int v);

struct PropagationRecord {
  std::vector<double> times;
  std::vector<double> field;
  std::vector<Eigen::VectorXd> populations;
  std::vector<double> total_bound;
  std::vector<double> norm;
  std::vector<double> dissociation;

  std::size_t size() const { return times.size(); }
};

struct PropagationResult {
  PropagationRecord record;
  WavefunctionState final_state;
  std::size_t steps = 0;
};

/// Potential, dipole and absorber sampled on a grid: everything the
/// propagator needs apart from the field.
struct PropagationSetup {
  RadialGrid grid;
  std::vector<double> potential;
  std::vector<double> dipole;
  std::optional<CapSpec> cap;
  double time_step = 1.0;

  static PropagationSetup sampled(const RadialGrid& grid, const PotentialModel& potential,
                                  const DipoleCurve& dipole, std::optional<CapSpec> cap,
                                  double time_step);
};

/// Symmetric Strang splitting exp(-i T dt/2) exp(-i W(t + dt/2) dt) exp(-i T dt/2)
/// with W = V + eps D + V_cap. The kinetic factors act in momentum space on a
/// periodic Fourier grid.
class SplitOperatorPropagator {
 public:
  explicit SplitOperatorPropagator(const PropagationSetup& setup);

  double time_step() const { return dt_; }
  const RadialGrid& grid() const { return grid_; }

  /// One full Strang step; advances state.time by dt.
  void step(WavefunctionState& state, const FieldFunction& field);

  /// Steps until t >= t_max. Observables are recorded at the start, every
  /// `sample_stride` steps and after the last step. `spectrum` may be null, in
  /// which case only norm and field are recorded.
  PropagationResult propagate(WavefunctionState initial, const FieldFunction& field, double t_max,
                              int sample_stride, const VibrationalSpectrum* spectrum);

 private:
  void kinetic(const std::vector<std::complex<double>>& phase);
  void potential(double midpoint_field);
  void record(PropagationRecord& rec, const WavefunctionState& state, double field_value,
              const VibrationalSpectrum* spectrum, std::size_t step) const;

  RadialGrid grid_;
  double dt_;
  std::vector<double> dipole_;
  std::vector<std::complex<double>> static_phase_; // exp(-i (V + V_cap) dt)
  std::vector<std::complex<double>> half_kinetic_;  // exp(-i k^2/2mu dt/2) / n
  std::vector<std::complex<double>> full_kinetic_;  // exp(-i k^2/2mu dt) / n
  FftBuffer buffer_;
};

/// Largest step with max|W| dt < 0.1 rad and Nyquist kinetic phase < 1 rad,
/// for fields up to `max_field`.
double default_time_step(const PropagationSetup& setup, double max_field);

/// Halves `start` until the final populations of two successive steps differ
/// by less than `tolerance` (or `max_halvings` is reached) and returns the
/// coarser step of the converged pair.
double converge_time_step(PropagationSetup setup, double start, const WavefunctionState& initial,
                          const FieldFunction& field, double t_max,
                          const VibrationalSpectrum& spectrum, double tolerance = 1e-6,
                          int max_halvings = 8);

}  // namespace vibld
