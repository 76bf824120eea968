#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vibld/curves.hpp"

namespace vibld {

/// Uniform radial grid R_k = r_min + k * dR, k = 0 .. n_points - 1, shared by
/// the eigensolver and the wavepacket propagator.
struct RadialGrid {
  double r_min = 0.0;
  double r_max = 0.0;
  int n_points = 0;
  double reduced_mass = 1.0;

  RadialGrid() = default;
  RadialGrid(double rmin, double rmax, int n, double mu);

  double spacing() const { return (r_max - r_min) / (n_points - 1); }
  double point(int k) const { return r_min + k * spacing(); }
  std::vector<double> points() const;

  /// Same extent, twice the resolution (2n - 1 points keeps the old nodes).
  RadialGrid refined() const;
};

/// Bound levels of one potential. Wavefunctions are stored column-wise and
/// normalized so that dR * sum_k psi(R_k)^2 = 1.
struct VibrationalSpectrum {
  RadialGrid grid;
  Eigen::VectorXd energies;
  Eigen::MatrixXd wavefunctions;

  int bound_count() const { return static_cast<int>(energies.size()); }
  Eigen::VectorXd level(int v) const { return wavefunctions.col(v); }
  /// E_i - E_j
  double transition(int i, int j) const { return energies(i) - energies(j); }
};

/// Colbert-Miller kinetic energy plus the diagonal potential on the grid.
Eigen::MatrixXd build_hamiltonian(const RadialGrid& grid, const PotentialModel& potential);

/// All eigenpairs of H below `threshold`, ascending, grid-normalized and sign
/// fixed so that each wavefunction is positive at its first lobe.
/// Throws EmptySpectrumError when nothing lies below the threshold.
VibrationalSpectrum solve_bound_states(const Eigen::MatrixXd& hamiltonian, const RadialGrid& grid,
                                       double threshold = 0.0);

/// Convenience: build_hamiltonian + solve_bound_states.
VibrationalSpectrum compute_spectrum(const RadialGrid& grid, const PotentialModel& potential,
                                     double threshold = 0.0);

/// Interior sign changes of level v (amplitudes below `floor` * max are ignored).
int node_count(const VibrationalSpectrum& spectrum, int v, double floor = 1e-6);

/// Signed dipole matrix <v|D|v'> by grid quadrature.
Eigen::MatrixXd dipole_matrix(const VibrationalSpectrum& spectrum, const DipoleCurve& dipole);

/// Squared dipole matrix elements |<v|D|v'>|^2.
Eigen::MatrixXd sdme_map(const VibrationalSpectrum& spectrum, const DipoleCurve& dipole);

/// Unit conversions used throughout (atomic units, hbar = 1).
namespace units {
inline constexpr double speed_of_light = 137.035999;       // c in a.u.
inline constexpr double time_au_seconds = 2.4188843265e-17; // 1 a.u. of time in s
inline constexpr double angular_frequency_au = 4.134137e16; // 1 a.u. of omega in rad/s
inline constexpr double amu_electron_masses = 1822.888486;
}  // namespace units

/// Spontaneous emission rate i -> v in 1/s, A = (4/3) w^3 D_iv / c^3 in a.u.
/// with D_iv the squared dipole matrix element. Requires i > v.
double einstein_rate(const VibrationalSpectrum& spectrum, const Eigen::MatrixXd& sdme, int i,
                     int v);

enum class LifetimeConvention {
  inverse_total_rate, // 1 / sum_v A_iv
  sum_of_inverses,    // sum_v 1 / A_iv, the alternative reading
};

/// Radiative lifetime of level i in seconds. Returns +inf when every decay
/// channel has zero rate, including the ground level.
double lifetime(const VibrationalSpectrum& spectrum, const Eigen::MatrixXd& sdme, int i,
                LifetimeConvention convention = LifetimeConvention::inverse_total_rate);

}  // namespace vibld
