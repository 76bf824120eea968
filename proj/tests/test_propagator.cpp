#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support.hpp"
#include "vibld/config.hpp"
#include "vibld/errors.hpp"
#include "vibld/propagator.hpp"
#include "vibld/pulse.hpp"

using namespace vibld;
using cd = std::complex<double>;

namespace {

const FieldFunction no_field = [](double) { return 0.0; };

struct Desk {
  RadialGrid grid{5.0, 45.0, 1024, krb::reduced_mass};
  MorsePotential morse{krb::well_depth, krb::equilibrium_distance, krb::morse_width};
  DipoleCurve dipole = DipoleModel::decaying(krb::dipole_scale, krb::dipole_range,
                                             krb::dipole_exponent);
  VibrationalSpectrum spec = compute_spectrum(grid, morse);

  PropagationSetup setup(double dt, std::optional<CapSpec> cap = std::nullopt) const {
    return PropagationSetup::sampled(grid, morse, dipole, cap, dt);
  }
};

// A resonant chirped pulse driving the desk system hard enough to matter.
ChirpedPulseParams test_pulse(const VibrationalSpectrum& s) {
  return {2e-3, s.transition(20, 19), 6e4, 2e4, 1e-10};
}

double distance(const WavefunctionState& a, const WavefunctionState& b, double dr) {
  return std::sqrt(dr * (a.psi - b.psi).squaredNorm());
}

WavefunctionState gaussian(const RadialGrid& g, double x0, double s0, double k0) {
  WavefunctionState s;
  s.psi.resize(g.n_points);
  const double c = std::pow(2.0 * std::numbers::pi * s0 * s0, -0.25);
  for (int k = 0; k < g.n_points; ++k) {
    const double x = g.point(k) - x0;
    s.psi(k) = c * std::exp(-x * x / (4.0 * s0 * s0)) * std::polar(1.0, k0 * x);
  }
  return s;
}

double probability_beyond(const WavefunctionState& s, const RadialGrid& g, double r0) {
  double p = 0.0;
  for (int k = 0; k < g.n_points; ++k) {
    if (g.point(k) > r0) p += std::norm(s.psi(k));
  }
  return p * g.spacing();
}

}  // namespace

TEST_CASE("cap values") {
  const CapSpec cap{100.0, 5e-6};
  CHECK(cap_value(cap, 100.0) == cd(0.0, 0.0));
  CHECK(cap_value(cap, 50.0) == cd(0.0, 0.0));
  CHECK(cap_value(cap, 101.0) == cd(0.0, -5e-6));
  const RadialGrid g(3.0, 143.0, 64, 1.0);
  CHECK_NOTHROW(cap.validate(g));
  CHECK_THROWS_AS((CapSpec{150.0, 5e-6}).validate(g), std::invalid_argument);
  CHECK_THROWS_AS((CapSpec{100.0, 0.0}).validate(g), std::invalid_argument);
}

TEST_CASE("populations of simple states") {
  Desk d;
  const auto s = level_state(d.spec, 12);
  const auto snap = populations(s, d.spec);
  CHECK(snap.levels(12) == doctest::Approx(1.0).epsilon(1e-12));
  for (int v = 0; v < d.spec.bound_count(); ++v) {
    if (v != 12) CHECK(snap.levels(v) < 1e-20);
  }
  WavefunctionState mix;
  mix.psi = (level_state(d.spec, 3).psi + cd(0.0, 1.0) * level_state(d.spec, 7).psi) /
            std::sqrt(2.0);
  const auto m = populations(mix, d.spec);
  CHECK(m.levels(3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.levels(7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.total_bound <= m.norm + 1e-8);
  CHECK(m.dissociation == 1.0 - m.norm);
  CHECK(population(mix, d.spec, 7) == doctest::Approx(m.levels(7)));
}

TEST_CASE("free gaussian dispersion") {
  const RadialGrid g(1.0, 201.0, 2048, 1.0);
  PropagationSetup setup;
  setup.grid = g;
  setup.potential.assign(2048, 0.0);
  setup.dipole.assign(2048, 0.0);
  setup.time_step = 0.01;
  SplitOperatorPropagator prop(setup);
  const double s0 = 1.0;
  const auto res = prop.propagate(gaussian(g, 101.0, s0, 0.0), no_field, 10.0, 1000, nullptr);
  CHECK(res.steps == 1000);
  const auto& psi = res.final_state.psi;
  double m1 = 0.0, m2 = 0.0;
  for (int k = 0; k < g.n_points; ++k) {
    const double p = std::norm(psi(k)) * g.spacing();
    m1 += p * g.point(k);
    m2 += p * g.point(k) * g.point(k);
  }
  const double width = std::sqrt(m2 - m1 * m1);
  const double t = res.final_state.time;
  CHECK(t == doctest::Approx(10.0));
  CHECK(relative(width, std::sqrt(s0 * s0 + std::pow(t / (2.0 * s0), 2))) < 1e-6);
}

TEST_CASE("eigenstate evolves by a phase") {
  const RadialGrid g(5.0, 25.0, 401, 1.0);
  const HarmonicPotential v{1.0, 1.0, 15.0};
  const auto spec = compute_spectrum(g, v, 3.0);
  auto setup = PropagationSetup::sampled(g, v, DipoleModel::constant(0.0), std::nullopt, 5e-4);
  SplitOperatorPropagator prop(setup);
  const auto res = prop.propagate(level_state(spec, 1), no_field, 5.0, 10000, &spec);
  CHECK(res.steps == 10000);
  const double dr = g.spacing();
  const cd overlap = dr * spec.wavefunctions.col(1).cast<cd>().dot(res.final_state.psi);
  CHECK(std::abs(std::norm(overlap) - 1.0) < 1e-8);
  const double expected = -spec.energies(1) * res.final_state.time;
  const double diff = std::remainder(std::arg(overlap) - expected, 2.0 * std::numbers::pi);
  CHECK(std::abs(diff) < 1e-6);
}

TEST_CASE("unitarity without absorber") {
  Desk d;
  const auto p = test_pulse(d.spec);
  SplitOperatorPropagator prop(d.setup(20.0));
  const FieldFunction field = [p](double t) { return amplitude(p, t); };
  const auto res = prop.propagate(level_state(d.spec, 20), field, 2e5, 1000, &d.spec);
  CHECK(res.steps == 10000);
  CHECK(std::abs(res.record.norm.back() - res.record.norm.front()) < 1e-10);
  for (std::size_t k = 0; k < res.record.size(); ++k) {
    CHECK(res.record.total_bound[k] <= res.record.norm[k] + 1e-8);
    CHECK(res.record.dissociation[k] == 1.0 - res.record.norm[k]);
  }
  // the pulse actually moved population
  CHECK(res.record.populations.back()(20) < 0.9);
}

TEST_CASE("Strang second order") {
  Desk d;
  const auto p = test_pulse(d.spec);
  const FieldFunction field = [p](double t) { return amplitude(p, t); };
  auto final_state = [&](double dt) {
    SplitOperatorPropagator prop(d.setup(dt));
    return prop.propagate(level_state(d.spec, 20), field, 1.2e5, 1 << 30, nullptr).final_state;
  };
  const double dt = 400.0;
  const auto reference = final_state(dt / 8.0);
  const double e1 = distance(final_state(dt), reference, d.grid.spacing());
  const double e2 = distance(final_state(dt / 2.0), reference, d.grid.spacing());
  INFO("error ratio " << e1 / e2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("time reversal") {
  Desk d;
  const auto p = test_pulse(d.spec);
  const FieldFunction field = [p](double t) { return amplitude(p, t); };
  SplitOperatorPropagator forward(d.setup(100.0));
  const auto initial = level_state(d.spec, 20);
  const auto there = forward.propagate(initial, field, 1.2e5, 1 << 30, nullptr);
  SplitOperatorPropagator backward(d.setup(-100.0));
  const auto back = backward.propagate(there.final_state, field, 0.0, 1 << 30, nullptr);
  CHECK(back.steps == there.steps);
  CHECK(std::abs(back.final_state.time) < 1e-6);
  const cd overlap = d.grid.spacing() * initial.psi.dot(back.final_state.psi);
  CHECK(std::abs(1.0 - std::norm(overlap)) < 1e-8);
  CHECK_THROWS_AS(SplitOperatorPropagator(d.setup(-100.0, CapSpec{35.0, 1e-5})),
                  std::invalid_argument);
}

TEST_CASE("zero field keeps populations") {
  Desk d;
  // The DVR level is an eigenstate of the split step only up to O(dt^2).
  SplitOperatorPropagator prop(d.setup(25.0, CapSpec{35.0, 1e-5}));
  const auto res = prop.propagate(level_state(d.spec, 15), no_field, 1e5, 200, &d.spec);
  for (const auto& pops : res.record.populations) {
    CHECK(pops(15) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(pops(14) < 1e-10);
  }
}

TEST_CASE("sample stride and record layout") {
  Desk d;
  SplitOperatorPropagator prop(d.setup(200.0));
  const auto res = prop.propagate(level_state(d.spec, 15), no_field, 200.0 * 1001, 100, &d.spec);
  CHECK(res.steps == 1001);
  CHECK(res.record.size() == (1001 + 99) / 100 + 1);
  CHECK(res.record.times.front() == 0.0);
  CHECK(res.record.times[1] == doctest::Approx(200.0 * 100));
  CHECK(res.record.times.back() == doctest::Approx(200.0 * 1001));
  CHECK_THROWS_AS(prop.propagate(level_state(d.spec, 15), no_field, 1e4, 0, &d.spec),
                  std::invalid_argument);
}

TEST_CASE("blowup carries the step index") {
  Desk d;
  SplitOperatorPropagator prop(d.setup(200.0));
  const FieldFunction bad = [](double t) {
    return t > 200.0 * 30 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  };
  try {
    prop.propagate(level_state(d.spec, 15), bad, 200.0 * 100, 10, &d.spec);
    FAIL("expected a blowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.step() == 40);
  }
}

TEST_CASE("Rabi oscillation of a weakly driven pair") {
  // Strongly anharmonic toy well so the 1-0 pair is isolated.
  const double mu = 1000.0;
  const MorsePotential m(0.01, 3.0, 1.0);
  const RadialGrid g(1.5, 20.0, 512, mu);
  const auto spec = compute_spectrum(g, m);
  const DipoleCurve dip = DipoleModel::linear(0.0, 1.0, 3.0);
  const auto dm = dipole_matrix(spec, dip);
  const double w = spec.transition(1, 0);
  const double d10 = std::abs(dm(1, 0));
  const double omega_rabi = 1e-4;
  const double eps = omega_rabi / d10;
  const double period = 2.0 * std::numbers::pi / (eps * d10);

  auto setup = PropagationSetup::sampled(g, m, dip, std::nullopt, 1.0);
  SplitOperatorPropagator prop(setup);
  const FieldFunction field = [eps, w](double t) { return eps * std::cos(w * t); };
  const auto res = prop.propagate(level_state(spec, 1), field, 0.75 * period, 20, &spec);
  // full transfer to level 0 happens after half a period
  std::size_t best = 0;
  for (std::size_t k = 0; k < res.record.size(); ++k) {
    if (res.record.populations[k](0) > res.record.populations[best](0)) best = k;
  }
  const double measured = 2.0 * res.record.times[best];
  INFO("Rabi period " << measured << " vs " << period << ", peak transfer "
                         << res.record.populations[best](0));
  CHECK(relative(measured, period) < 0.05);
  CHECK(res.record.populations[best](0) > 0.9);
}

TEST_CASE("absorber accounting against a larger grid") {
  // Outgoing packet: what the absorber removes must equal what crosses R0 on
  // a grid twice as long without absorber.
  const double r0 = 60.0;
  const RadialGrid small(1.0, 101.0, 1024, 1.0);
  const RadialGrid big(1.0, 201.0, 2047, 1.0);
  REQUIRE(small.spacing() == doctest::Approx(big.spacing()).epsilon(1e-3));
  auto flat = [](const RadialGrid& g, std::optional<CapSpec> cap) {
    PropagationSetup s;
    s.grid = g;
    s.potential.assign(g.n_points, 0.0);
    s.dipole.assign(g.n_points, 0.0);
    s.cap = cap;
    s.time_step = 0.01;
    return s;
  };
  SplitOperatorPropagator with_cap(flat(small, CapSpec{r0, 1e-3}));
  SplitOperatorPropagator without(flat(big, std::nullopt));
  auto a = gaussian(small, 30.0, 2.0, 2.0);
  auto b = gaussian(big, 30.0, 2.0, 2.0);
  double previous_norm = a.norm(small.spacing());
  for (double t : {10.0, 20.0, 30.0, 40.0, 45.0}) {
    const auto ra = with_cap.propagate(a, no_field, t, 100, nullptr);
    const auto rb = without.propagate(b, no_field, t, 1 << 30, nullptr);
    for (double n : ra.record.norm) {
      CHECK(n <= previous_norm + 1e-12);
      previous_norm = n;
    }
    a = ra.final_state;
    b = rb.final_state;
    const double removed = 1.0 - a.norm(small.spacing());
    const double in_cap = probability_beyond(a, small, r0);
    const double crossed = probability_beyond(b, big, r0);
    INFO("t=" << t << " removed " << removed << " in cap " << in_cap << " crossed " << crossed);
    CHECK(std::abs(removed + in_cap - crossed) < 1e-6);
  }
  CHECK(probability_beyond(a, small, r0) < 1e-4);
  CHECK(1.0 - a.norm(small.spacing()) > 0.99);
}

TEST_CASE("automatic and converged time steps") {
  Desk d;
  const auto setup = d.setup(1.0, CapSpec{35.0, 1e-5});
  const double dt = default_time_step(setup, 1e-3);
  const double k = std::numbers::pi / d.grid.spacing();
  CHECK(dt <= 1.0 / (k * k / (2.0 * d.grid.reduced_mass)) * (1.0 + 1e-12));
  CHECK(dt > 0.0);
  const auto p = test_pulse(d.spec);
  const FieldFunction field = [p](double t) { return amplitude(p, t); };
  const double converged =
      converge_time_step(setup, 800.0, level_state(d.spec, 20), field, 1.2e5, d.spec, 1e-6);
  CHECK(converged <= 800.0);
  auto final_pops = [&](double step) {
    auto s = setup;
    s.time_step = step;
    SplitOperatorPropagator prop(s);
    return prop.propagate(level_state(d.spec, 20), field, 1.2e5, 1 << 30, &d.spec)
        .record.populations.back();
  };
  CHECK((final_pops(converged) - final_pops(converged / 2)).cwiseAbs().maxCoeff() < 1e-6);
}
