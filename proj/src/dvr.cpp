#include "vibld/dvr.hpp"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vibld/errors.hpp"

namespace vibld {

RadialGrid::RadialGrid(double rmin, double rmax, int n, double mu)
    : r_min(rmin), r_max(rmax), n_points(n), reduced_mass(mu) {
  if (n < 16) throw std::invalid_argument("radial grid needs at least 16 points");
  if (!(rmin > 0.0) || !(rmax > rmin)) {
    throw std::invalid_argument("radial grid requires 0 < r_min < r_max");
  }
  if (!(mu > 0.0)) throw std::invalid_argument("reduced mass must be positive");
}

std::vector<double> RadialGrid::points() const {
  std::vector<double> r(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) r[static_cast<std::size_t>(k)] = point(k);
  return r;
}

RadialGrid RadialGrid::refined() const {
  return RadialGrid(r_min, r_max, 2 * n_points - 1, reduced_mass);
}

Eigen::MatrixXd build_hamiltonian(const RadialGrid& grid, const PotentialModel& potential) {
  const int n = grid.n_points;
  const double dr = grid.spacing();
  const double prefactor = 1.0 / (2.0 * grid.reduced_mass * dr * dr);
  const double diagonal = prefactor * std::numbers::pi * std::numbers::pi / 3.0;
  const auto v = sample(potential, grid.points());

  Eigen::MatrixXd h(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      const int d = i - j;
      const double t = prefactor * ((d % 2 == 0) ? 2.0 : -2.0) / (static_cast<double>(d) * d);
      h(i, j) = t;
      h(j, i) = t;
    }
    h(j, j) = diagonal + v[static_cast<std::size_t>(j)];
  }
  return h;
}

namespace {

void check_lapack(lapack_int info, const char* routine) {
  if (info != 0) {
    throw std::runtime_error(std::string(routine) + " failed with info = " + std::to_string(info));
  }
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> psi) {
  const double peak = psi.cwiseAbs().maxCoeff();
  const double floor = 1e-3 * peak;
  const Eigen::Index n = psi.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = std::abs(psi(k));
    if (a < floor) continue;
    const double left = k > 0 ? std::abs(psi(k - 1)) : 0.0;
    const double right = k + 1 < n ? std::abs(psi(k + 1)) : 0.0;
    if (a >= left && a >= right) {
      if (psi(k) < 0.0) psi = -psi;
      return;
    }
  }
}

}  // namespace

VibrationalSpectrum solve_bound_states(const Eigen::MatrixXd& hamiltonian, const RadialGrid& grid,
                                       double threshold) {
  const lapack_int n = static_cast<lapack_int>(hamiltonian.rows());
  if (hamiltonian.cols() != n || n != grid.n_points) {
    throw std::invalid_argument("Hamiltonian dimension does not match the grid");
  }

  // Householder tridiagonalization, bisection for the levels below the
  // threshold, inverse iteration for their vectors, then back-transformation.
  // Only the bound columns are ever allocated.
  Eigen::MatrixXd a = hamiltonian;
  Eigen::VectorXd d(n), e(std::max<lapack_int>(n - 1, 1)), tau(std::max<lapack_int>(n - 1, 1));
  check_lapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n, d.data(), e.data(),
                              tau.data()),
               "dsytrd");

  double lower = std::numeric_limits<double>::max();
  for (lapack_int k = 0; k < n; ++k) {
    const double radius = (k > 0 ? std::abs(e(k - 1)) : 0.0) + (k + 1 < n ? std::abs(e(k)) : 0.0);
    lower = std::min(lower, d(k) - radius);
  }
  if (!(threshold > lower)) throw EmptySpectrumError("no eigenvalue below the threshold");

  lapack_int m = 0, nsplit = 0;
  Eigen::VectorXd w(n);
  std::vector<lapack_int> iblock(static_cast<std::size_t>(n)), isplit(static_cast<std::size_t>(n));
  check_lapack(LAPACKE_dstebz('V', 'E', n, lower - 1.0, threshold, 0, 0, 0.0, d.data(), e.data(),
                              &m, &nsplit, w.data(), iblock.data(), isplit.data()),
               "dstebz");
  if (m == 0) throw EmptySpectrumError("no bound states below the threshold");

  Eigen::MatrixXd z(n, m);
  std::vector<lapack_int> ifail(static_cast<std::size_t>(m));
  check_lapack(LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), m, w.data(), iblock.data(),
                              isplit.data(), z.data(), n, ifail.data()),
               "dstein");
  check_lapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, m, a.data(), n, tau.data(),
                              z.data(), n),
               "dormtr");

  VibrationalSpectrum spectrum;
  spectrum.grid = grid;
  spectrum.energies = w.head(m);
  spectrum.wavefunctions = z / std::sqrt(grid.spacing());
  for (lapack_int v = 0; v < m; ++v) fix_sign(spectrum.wavefunctions.col(v));
  return spectrum;
}

VibrationalSpectrum compute_spectrum(const RadialGrid& grid, const PotentialModel& potential,
                                     double threshold) {
  return solve_bound_states(build_hamiltonian(grid, potential), grid, threshold);
}

int node_count(const VibrationalSpectrum& spectrum, int v, double floor) {
  const Eigen::VectorXd psi = spectrum.wavefunctions.col(v);
  const double cutoff = floor * psi.cwiseAbs().maxCoeff();
  int nodes = 0;
  int last_sign = 0;
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    if (std::abs(psi(k)) < cutoff) continue;
    const int s = psi(k) > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  return nodes;
}

Eigen::MatrixXd dipole_matrix(const VibrationalSpectrum& spectrum, const DipoleCurve& dipole) {
  const auto values = sample(dipole, spectrum.grid.points());
  const Eigen::Map<const Eigen::VectorXd> d(values.data(), static_cast<Eigen::Index>(values.size()));
  const Eigen::MatrixXd weighted = d.asDiagonal() * spectrum.wavefunctions;
  Eigen::MatrixXd m = spectrum.grid.spacing() * (spectrum.wavefunctions.transpose() * weighted);
  // Quadrature of a symmetric form; remove the roundoff asymmetry.
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd sdme_map(const VibrationalSpectrum& spectrum, const DipoleCurve& dipole) {
  return dipole_matrix(spectrum, dipole).array().square().matrix();
}

double einstein_rate(const VibrationalSpectrum& spectrum, const Eigen::MatrixXd& sdme, int i,
                     int v) {
  if (i <= v) throw std::invalid_argument("einstein_rate requires i > v");
  if (v < 0 || i >= spectrum.bound_count()) throw std::out_of_range("level index out of range");
  const double omega = spectrum.transition(i, v);
  const double c = units::speed_of_light;
  const double rate_au = 4.0 / 3.0 * omega * omega * omega * sdme(i, v) / (c * c * c);
  return rate_au / units::time_au_seconds;
}

double lifetime(const VibrationalSpectrum& spectrum, const Eigen::MatrixXd& sdme, int i,
                LifetimeConvention convention) {
  if (i < 0 || i >= spectrum.bound_count()) throw std::out_of_range("lifetime level out of range");
  const double inf = std::numeric_limits<double>::infinity();
  double total_rate = 0.0;
  double sum_inverse = 0.0;
  for (int v = 0; v < i; ++v) {
    const double a = einstein_rate(spectrum, sdme, i, v);
    total_rate += a;
    sum_inverse += a > 0.0 ? 1.0 / a : inf;
  }
  if (total_rate <= 0.0) return inf;
  return convention == LifetimeConvention::inverse_total_rate ? 1.0 / total_rate : sum_inverse;
}

}  // namespace vibld
