#include "vibld/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "vibld/errors.hpp"

namespace vibld {

void CapSpec::validate(const RadialGrid& grid) const {
  if (!(strength > 0.0)) throw std::invalid_argument("CAP strength must be positive");
  if (!(onset > grid.r_min && onset < grid.r_max)) {
    throw std::invalid_argument("CAP onset must lie inside the grid");
  }
}

std::complex<double> cap_value(const CapSpec& cap, double r) {
  if (r <= cap.onset) return {0.0, 0.0};
  const double x = r - cap.onset;
  return {0.0, -cap.strength * x * x};
}

WavefunctionState level_state(const VibrationalSpectrum& spectrum, int v) {
  if (v < 0 || v >= spectrum.bound_count()) throw std::out_of_range("level is not bound");
  WavefunctionState s;
  s.psi = spectrum.wavefunctions.col(v).cast<std::complex<double>>();
  s.time = 0.0;
  return s;
}

PopulationSnapshot populations(const WavefunctionState& state,
                               const VibrationalSpectrum& spectrum) {
  if (state.psi.size() != spectrum.wavefunctions.rows()) {
    throw std::invalid_argument("state and spectrum live on different grids");
  }
  const double dr = spectrum.grid.spacing();
  const Eigen::VectorXd re = dr * (spectrum.wavefunctions.transpose() * state.psi.real());
  const Eigen::VectorXd im = dr * (spectrum.wavefunctions.transpose() * state.psi.imag());
  PopulationSnapshot snap;
  snap.levels = re.array().square() + im.array().square();
  snap.total_bound = snap.levels.sum();
  snap.norm = state.norm(dr);
  snap.dissociation = 1.0 - snap.norm;
  return snap;
}

double population(const WavefunctionState& state, const VibrationalSpectrum& spectrum, int v) {
  const double dr = spectrum.grid.spacing();
  const auto psi = spectrum.wavefunctions.col(v);
  const double re = dr * psi.dot(state.psi.real());
  const double im = dr * psi.dot(state.psi.imag());
  return re * re + im * im;
}

PropagationSetup PropagationSetup::sampled(const RadialGrid& grid, const PotentialModel& potential,
                                           const DipoleCurve& dipole, std::optional<CapSpec> cap,
                                           double time_step) {
  PropagationSetup s;
  s.grid = grid;
  const auto r = grid.points();
  s.potential = sample(potential, r);
  s.dipole = sample(dipole, r);
  s.cap = cap;
  s.time_step = time_step;
  return s;
}

namespace {

std::vector<double> squared_momenta(const RadialGrid& grid) {
  const int n = grid.n_points;
  const double dk = 2.0 * std::numbers::pi / (n * grid.spacing());
  std::vector<double> k2(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int wrapped = j < (n + 1) / 2 ? j : j - n;
    const double k = wrapped * dk;
    k2[static_cast<std::size_t>(j)] = k * k;
  }
  return k2;
}

}  // namespace

SplitOperatorPropagator::SplitOperatorPropagator(const PropagationSetup& setup)
    : grid_(setup.grid),
      dt_(setup.time_step),
      dipole_(setup.dipole),
      buffer_(static_cast<std::size_t>(setup.grid.n_points)) {
  const auto n = static_cast<std::size_t>(grid_.n_points);
  if (setup.potential.size() != n || setup.dipole.size() != n) {
    throw std::invalid_argument("sampled curves do not match the grid");
  }
  if (!(dt_ != 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("time step must be nonzero");
  if (setup.cap) {
    setup.cap->validate(grid_);
    if (dt_ < 0.0) throw std::invalid_argument("backward propagation with an absorber diverges");
  }

  static_phase_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = grid_.point(static_cast<int>(k));
    const std::complex<double> w =
        setup.potential[k] + (setup.cap ? cap_value(*setup.cap, r) : std::complex<double>{});
    static_phase_[k] = std::exp(std::complex<double>(0.0, -1.0) * w * dt_);
  }

  const auto k2 = squared_momenta(grid_);
  const double inv_n = 1.0 / static_cast<double>(n);
  half_kinetic_.resize(n);
  full_kinetic_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double e = k2[j] / (2.0 * grid_.reduced_mass);
    half_kinetic_[j] = std::polar(inv_n, -e * 0.5 * dt_);
    full_kinetic_[j] = std::polar(inv_n, -e * dt_);
  }
}

void SplitOperatorPropagator::kinetic(const std::vector<std::complex<double>>& phase) {
  buffer_.forward();
  auto v = buffer_.values();
  for (std::size_t j = 0; j < v.size(); ++j) v[j] *= phase[j];
  buffer_.backward();
}

void SplitOperatorPropagator::potential(double midpoint_field) {
  auto v = buffer_.values();
  const double a = -midpoint_field * dt_;
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] *= static_phase_[k] * std::polar(1.0, a * dipole_[k]);
  }
}

void SplitOperatorPropagator::step(WavefunctionState& state, const FieldFunction& field) {
  if (state.psi.size() != grid_.n_points) throw std::invalid_argument("state grid mismatch");
  auto v = buffer_.values();
  std::copy(state.psi.data(), state.psi.data() + state.psi.size(), v.begin());
  kinetic(half_kinetic_);
  potential(field(state.time + 0.5 * dt_));
  kinetic(half_kinetic_);
  std::copy(v.begin(), v.end(), state.psi.data());
  state.time += dt_;
}

void SplitOperatorPropagator::record(PropagationRecord& rec, const WavefunctionState& state,
                                     double field_value, const VibrationalSpectrum* spectrum,
                                     std::size_t step) const {
  const double norm = state.norm(grid_.spacing());
  if (!std::isfinite(norm)) throw NumericalBlowup("non-finite norm", step);
  rec.times.push_back(state.time);
  rec.field.push_back(field_value);
  rec.norm.push_back(norm);
  rec.dissociation.push_back(1.0 - norm);
  if (spectrum != nullptr) {
    auto snap = populations(state, *spectrum);
    if (!snap.levels.allFinite()) throw NumericalBlowup("non-finite population", step);
    rec.total_bound.push_back(snap.total_bound);
    rec.populations.push_back(std::move(snap.levels));
  }
}

PropagationResult SplitOperatorPropagator::propagate(WavefunctionState initial,
                                                     const FieldFunction& field, double t_max,
                                                     int sample_stride,
                                                     const VibrationalSpectrum* spectrum) {
  if (initial.psi.size() != grid_.n_points) throw std::invalid_argument("state grid mismatch");
  if (sample_stride < 1) throw std::invalid_argument("sample stride must be positive");
  const double span = t_max - initial.time;
  if (!(span * dt_ > 0.0)) throw std::invalid_argument("t_max must lie ahead of the initial time");
  const auto steps = static_cast<std::size_t>(std::ceil(span / dt_ * (1.0 - 1e-12)));
  const auto stride = static_cast<std::size_t>(sample_stride);
  const double t0 = initial.time;

  PropagationResult result;
  WavefunctionState& state = result.final_state;
  state = std::move(initial);
  record(result.record, state, field(state.time), spectrum, 0);

  // Adjacent half kinetic factors are fused into one full factor except
  // where the state is observed.
  auto v = buffer_.values();
  std::copy(state.psi.data(), state.psi.data() + state.psi.size(), v.begin());
  kinetic(half_kinetic_);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = t0 + static_cast<double>(n) * dt_;
    potential(field(t + 0.5 * dt_));
    const bool last = n + 1 == steps;
    const bool observe = last || (n + 1) % stride == 0;
    if (!observe) {
      kinetic(full_kinetic_);
      continue;
    }
    kinetic(half_kinetic_);
    std::copy(v.begin(), v.end(), state.psi.data());
    state.time = t0 + static_cast<double>(n + 1) * dt_;
    record(result.record, state, field(state.time), spectrum, n + 1);
    if (!last) kinetic(half_kinetic_);
  }
  result.steps = steps;
  return result;
}

double default_time_step(const PropagationSetup& setup, double max_field) {
  double w_max = 0.0;
  for (std::size_t k = 0; k < setup.potential.size(); ++k) {
    const double r = setup.grid.point(static_cast<int>(k));
    std::complex<double> w = setup.potential[k] + max_field * std::abs(setup.dipole[k]);
    if (setup.cap) w += cap_value(*setup.cap, r);
    w_max = std::max(w_max, std::abs(w));
  }
  const double k_nyquist = std::numbers::pi / setup.grid.spacing();
  const double t_nyquist = k_nyquist * k_nyquist / (2.0 * setup.grid.reduced_mass);
  double dt = 1.0 / t_nyquist;
  if (w_max > 0.0) dt = std::min(dt, 0.1 / w_max);
  return dt;
}

double converge_time_step(PropagationSetup setup, double start, const WavefunctionState& initial,
                          const FieldFunction& field, double t_max,
                          const VibrationalSpectrum& spectrum, double tolerance,
                          int max_halvings) {
  auto final_populations = [&](double dt) {
    setup.time_step = dt;
    SplitOperatorPropagator prop(setup);
    auto res = prop.propagate(initial, field, t_max, std::numeric_limits<int>::max(), &spectrum);
    return res.record.populations.back();
  };
  double dt = start;
  Eigen::VectorXd coarse = final_populations(dt);
  for (int h = 0; h < max_halvings; ++h) {
    Eigen::VectorXd fine = final_populations(0.5 * dt);
    if ((fine - coarse).cwiseAbs().maxCoeff() < tolerance) return dt;
    dt *= 0.5;
    coarse = std::move(fine);
  }
  return dt;
}

}  // namespace vibld
