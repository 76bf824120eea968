#include "vibld/commands.hpp"

#include <boost/version.hpp>
#include <fftw3.h>
#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "vibld/errors.hpp"

namespace vibld {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double hartree_to_wavenumber = 219474.6313632;
constexpr double seconds_to_ns = 1e9;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

// json numbers for non-finite values become null; keep them readable instead.
json number(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

json pulse_json(const ChirpedPulseParams& p) {
  json j;
  const auto g = p.genes();
  for (std::size_t k = 0; k < g.size(); ++k) j[ChirpedPulseParams::gene_names[k]] = g[k];
  return j;
}

json ranges_json(const ParamRanges& r) {
  json j;
  for (std::size_t k = 0; k < r.genes.size(); ++k) {
    j[ChirpedPulseParams::gene_names[k]] = {r.genes[k].min, r.genes[k].max};
  }
  return j;
}

json setup_json(const RunConfig& c) {
  json j;
  j["scenario"] = c.name;
  j["scheme"] = c.scheme == Scheme::old ? "old" : "mld";
  j["initial_level"] = c.initial_level;
  j["target_level"] = c.target_level;
  j["ladder"] = c.resolved_ladder();
  j["grid"] = {{"r_min", c.grid.r_min},
               {"r_max", c.grid.r_max},
               {"points", c.grid.n_points},
               {"spacing", c.grid.spacing()},
               {"reduced_mass", c.grid.reduced_mass}};
  if (c.cap) {
    j["cap"] = {{"onset", c.cap->onset}, {"strength", c.cap->strength}};
  } else {
    j["cap"] = nullptr;
  }
  if (auto ref = preset_reference(c.name)) {
    j["reference"] = {{"target_population", ref->target_population},
                      {"bound_population", ref->bound_population},
                      {"note", "published outcome on the true curves"}};
  }
  return j;
}

void write_manifest(const fs::path& out, const std::string& command, const RunConfig* config,
                    std::optional<std::uint64_t> seed, const std::vector<std::string>& files) {
  json m;
  m["command"] = command;
  m["program"] = {{"name", "vibld"}, {"version", version}};
  if (config != nullptr) {
    const std::string ini = to_ini(*config);
    write_text(out / "config.ini", ini);
    m["config"] = "config.ini";
    m["config_hash"] = fnv1a_hex(ini);
  }
  if (seed) {
    m["seed"] = *seed;
  } else {
    m["seed"] = nullptr;
  }
  if (config == nullptr && fs::exists(out / "pulse.ini")) {
    std::ifstream in(out / "pulse.ini");
    std::stringstream text;
    text << in.rdbuf();
    m["config"] = "pulse.ini";
    m["config_hash"] = fnv1a_hex(text.str());
  }
  m["versions"] = library_versions();
  m["files"] = files;
  write_text(out / "manifest.json", m.dump(2) + "\n");
}

void write_summary(const fs::path& out, const json& summary) {
  write_text(out / "summary.json", summary.dump(2) + "\n");
}

std::string populations_csv(const PropagationRecord& rec, int levels) {
  std::ostringstream os;
  os << "t_au,t_ns,field";
  for (int v = 0; v < levels; ++v) os << ",p_" << v;
  os << ",total_bound,norm,dissociation\n";
  for (std::size_t k = 0; k < rec.size(); ++k) {
    os << format_number(rec.times[k]) << ','
       << format_number(rec.times[k] * units::time_au_seconds * seconds_to_ns) << ','
       << format_number(rec.field[k]);
    for (int v = 0; v < levels; ++v) {
      os << ',' << format_number(rec.populations[k].size() > v ? rec.populations[k](v) : 0.0);
    }
    os << ',' << format_number(rec.total_bound[k]) << ',' << format_number(rec.norm[k]) << ','
       << format_number(rec.dissociation[k]) << '\n';
  }
  return os.str();
}

json outcome_json(const PropagationResult& res, const Scenario& s) {
  const auto& rec = res.record;
  const auto& last = rec.populations.back();
  json j;
  j["final_initial_population"] = last(s.config.initial_level);
  j["final_target_population"] = last(s.config.target_level);
  j["final_total_bound"] = rec.total_bound.back();
  j["final_norm"] = rec.norm.back();
  j["final_dissociation"] = rec.dissociation.back();
  j["steps"] = res.steps;
  j["final_time_au"] = res.final_state.time;
  j["final_time_ns"] = res.final_state.time * units::time_au_seconds * seconds_to_ns;
  j["samples"] = rec.size();
  const auto peaks = peak_times(rec, s.ladder);
  json rungs = json::array();
  bool monotone = true;
  for (std::size_t k = 0; k < s.ladder.size(); ++k) {
    double peak = 0.0;
    for (std::size_t r = 0; r < rec.size(); ++r) {
      peak = std::max(peak, rec.populations[r](s.ladder[k]));
    }
    rungs.push_back({{"level", s.ladder[k]},
                     {"peak_time_au", peaks[k]},
                     {"peak_population", peak},
                     {"final_population", last(s.ladder[k])}});
    if (k > 0 && !(peaks[k] > peaks[k - 1])) monotone = false;
  }
  j["rungs"] = rungs;
  j["sequential_peaks"] = monotone;
  return j;
}

std::optional<std::string> ladder_warning(const Scenario& s) {
  try {
    check_ladder(s);
  } catch (const ChirpSignError& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

}  // namespace

json library_versions() {
  json v;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  v["fftw"] = std::string(fftw_version);
  lapack_int major = 0, minor = 0, patch = 0;
  LAPACKE_ilaver(&major, &minor, &patch);
  v["lapack"] = std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
  v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." +
               std::to_string(BOOST_VERSION / 100 % 1000) + "." +
               std::to_string(BOOST_VERSION % 100);
  v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  return v;
}

Scenario prepare_scenario(const RunConfig& config) {
  config.validate();
  Scenario s{config,
             make_potential(config.potential, config.grid.reduced_mass),
             make_dipole(config.dipole),
             nullptr,
             {},
             {},
             config.resolved_ladder()};
  auto spectrum =
      std::make_shared<VibrationalSpectrum>(compute_spectrum(config.grid, s.potential));
  s.dipoles = dipole_matrix(*spectrum, s.dipole);
  s.sdme = sdme_map(*spectrum, s.dipole);
  s.spectrum = std::move(spectrum);
  for (int v : s.ladder) {
    if (v >= s.spectrum->bound_count()) {
      throw ConfigError("level " + std::to_string(v) + " is not bound (" +
                        std::to_string(s.spectrum->bound_count()) + " bound levels)");
    }
  }
  return s;
}

void check_ladder(const Scenario& s) {
  const int n = s.spectrum->bound_count();
  for (int v : s.ladder) {
    if (v < 0 || v >= n) throw ConfigError("ladder level " + std::to_string(v) + " is not bound");
  }
  double previous = -1.0;
  for (std::size_t k = 0; k + 1 < s.ladder.size(); ++k) {
    const double w = s.spectrum->transition(s.ladder[k], s.ladder[k + 1]);
    if (!(w > previous)) {
      std::ostringstream os;
      os << "transition " << s.ladder[k] << "->" << s.ladder[k + 1] << " (" << format_number(w)
         << " hartree) does not exceed the previous rung; a descending ladder needs C > 0";
      throw ChirpSignError(os.str());
    }
    previous = w;
  }
}

PropagationSetup scenario_setup(const Scenario& s, double max_field) {
  auto setup = PropagationSetup::sampled(s.config.grid, s.potential, s.dipole, s.config.cap, 1.0);
  setup.time_step = s.config.time_step ? *s.config.time_step : default_time_step(setup, max_field);
  return setup;
}

double initial_lifetime(const Scenario& s) {
  return lifetime(*s.spectrum, s.sdme, s.config.initial_level);
}

RangeChoice resolve_ranges(const Scenario& s) {
  if (s.config.explicit_ranges) return {s.config.ga.ranges, std::nullopt};
  auto h = heuristic_ranges(*s.spectrum, s.dipoles, s.ladder, initial_lifetime(s),
                            s.config.heuristics);
  return {h.ranges, h};
}

std::vector<double> peak_times(const PropagationRecord& record, const std::vector<int>& levels) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (int v : levels) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < record.size(); ++k) {
      if (record.populations[k](v) > record.populations[best](v)) best = k;
    }
    out.push_back(record.size() ? record.times[best] : 0.0);
  }
  return out;
}

json cmd_eigensolve(const RunConfig& config, const fs::path& out, bool write_wavefunctions) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  const Scenario s = prepare_scenario(config);
  const auto& spec = *s.spectrum;
  const int n = spec.bound_count();

  std::vector<std::string> files{"energies.csv", "sdme.csv"};
  std::ostringstream e;
  e << "v,energy_hartree,energy_cm,binding_cm,nodes,lifetime_s\n";
  std::vector<double> lifetimes(n);
  for (int v = 0; v < n; ++v) {
    lifetimes[v] = lifetime(spec, s.sdme, v);
    e << v << ',' << format_number(spec.energies(v)) << ','
      << format_number(spec.energies(v) * hartree_to_wavenumber) << ','
      << format_number(-spec.energies(v) * hartree_to_wavenumber) << ',' << node_count(spec, v)
      << ',' << format_number(lifetimes[v]) << '\n';
  }
  write_text(out / "energies.csv", e.str());

  std::ostringstream m;
  m << "v";
  for (int v = 0; v < n; ++v) m << ',' << v;
  m << '\n';
  for (int a = 0; a < n; ++a) {
    m << a;
    for (int b = 0; b < n; ++b) m << ',' << format_number(s.sdme(a, b));
    m << '\n';
  }
  write_text(out / "sdme.csv", m.str());

  if (write_wavefunctions) {
    std::ostringstream w;
    w << "r_bohr";
    for (int v = 0; v < n; ++v) w << ",psi_" << v;
    w << '\n';
    for (int k = 0; k < spec.grid.n_points; ++k) {
      w << format_number(spec.grid.point(k));
      for (int v = 0; v < n; ++v) w << ',' << format_number(spec.wavefunctions(k, v));
      w << '\n';
    }
    write_text(out / "wavefunctions.csv", w.str());
    files.emplace_back("wavefunctions.csv");
  }

  json summary = setup_json(config);
  summary["command"] = "eigensolve";
  summary["bound_count"] = n;
  summary["potential"] = describe(s.potential);
  summary["dipole"] = describe(s.dipole);
  json levels = json::array();
  for (int v = 0; v < n; ++v) {
    levels.push_back({{"v", v}, {"energy_hartree", spec.energies(v)},
                      {"lifetime_s", number(lifetimes[v])}});
  }
  summary["levels"] = levels;
  if (auto w = ladder_warning(s)) summary["ladder_warning"] = *w;
  summary["wall_time_s"] = elapsed_seconds(start);
  write_summary(out, summary);
  files.emplace_back("summary.json");
  write_manifest(out, "eigensolve", &config, std::nullopt, files);
  return summary;
}

json cmd_propagate(const RunConfig& config, const ChirpedPulseParams& pulse, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  const Scenario s = prepare_scenario(config);
  const auto setup = scenario_setup(s, pulse.amplitude);
  SplitOperatorPropagator prop(setup);
  const FieldFunction field = [pulse](double t) { return amplitude(pulse, t); };
  const double t_max = pulse.delay + config.tail_widths * pulse.width;
  const auto res = prop.propagate(level_state(*s.spectrum, config.initial_level), field, t_max,
                                  config.sample_stride, s.spectrum.get());

  write_text(out / "populations.csv", populations_csv(res.record, s.spectrum->bound_count()));

  RunConfig resolved = config;
  resolved.pulse = pulse;
  resolved.time_step = setup.time_step;
  json summary = setup_json(config);
  summary["command"] = "propagate";
  summary["pulse"] = pulse_json(pulse);
  summary["time_step_au"] = setup.time_step;
  summary["sample_stride"] = config.sample_stride;
  summary["outcome"] = outcome_json(res, s);
  if (auto w = ladder_warning(s)) summary["ladder_warning"] = *w;
  summary["wall_time_s"] = elapsed_seconds(start);
  write_summary(out, summary);
  write_manifest(out, "propagate", &resolved, std::nullopt,
                 {"populations.csv", "summary.json"});
  return summary;
}

namespace {

std::string history_csv(const GaHistory& h) {
  std::ostringstream os;
  os << "generation,best,mean,min,failures,uniform_selection";
  for (const char* name : ChirpedPulseParams::gene_names) os << ",best_" << name;
  os << '\n';
  for (const auto& g : h.generations) {
    os << g.generation << ',' << format_number(g.best) << ',' << format_number(g.mean) << ','
       << format_number(g.min) << ',' << g.failures << ',' << (g.uniform_selection ? 1 : 0);
    for (double x : g.best_chromosome.genes()) os << ',' << format_number(x);
    os << '\n';
  }
  return os.str();
}

ChirpedPulseParams surrogate_center(const ParamRanges& r) {
  // Off-center optimum so a search that only samples the middle does not win.
  std::array<double, ChirpedPulseParams::gene_count> g{};
  const double where[] = {0.62, 0.35, 0.48, 0.71, 0.27};
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = r.genes[k].min + where[k] * r.genes[k].width();
  return ChirpedPulseParams::from_genes(g);
}

}  // namespace

json cmd_optimize(const RunConfig& config, const fs::path& out, bool surrogate, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);

  std::optional<Scenario> scenario;
  RangeChoice choice;
  if (surrogate && config.explicit_ranges) {
    choice.ranges = config.ga.ranges;
  } else {
    scenario = prepare_scenario(config);
    check_ladder(*scenario);
    choice = resolve_ranges(*scenario);
  }

  GaConfig ga = config.ga;
  ga.ranges = choice.ranges;
  ga.validate();

  std::unique_ptr<FitnessProblem> problem;
  if (surrogate) {
    problem = std::make_unique<SurrogateProblem>(ga.ranges, surrogate_center(ga.ranges));
  } else {
    auto setup = scenario_setup(*scenario, ga.ranges.amplitude().max);
    problem = std::make_unique<LadderProblem>(setup, scenario->spectrum, config.initial_level,
                                              config.target_level, config.tail_widths);
  }

  if (log != nullptr && choice.heuristic) {
    *log << "heuristic ranges (tau >= " << format_number(choice.heuristic->width_lower_bound)
         << " a.u.):\n";
    for (std::size_t k = 0; k < ga.ranges.genes.size(); ++k) {
      *log << "  " << ChirpedPulseParams::gene_names[k] << " ["
           << format_number(ga.ranges.genes[k].min) << ", "
           << format_number(ga.ranges.genes[k].max) << "]\n";
    }
  }
  auto observer = [log](const GenerationSummary& g) {
    if (log == nullptr) return;
    *log << "generation " << g.generation << ": best " << format_number(g.best) << " mean "
         << format_number(g.mean) << (g.failures ? " failures " + std::to_string(g.failures) : "")
         << '\n';
  };
  const auto result = optimize(ga, *problem, observer);
  const auto& best = result.best.chromosome;

  write_text(out / "history.csv", history_csv(result.history));
  write_text(out / "best_pulse.ini", pulse_to_ini(best));
  std::vector<std::string> files{"history.csv", "best_pulse.ini"};

  json summary;
  if (scenario) {
    summary = setup_json(config);
  } else {
    summary["scenario"] = config.name;
  }
  summary["command"] = "optimize";
  summary["mode"] = surrogate ? "surrogate" : "propagation";
  summary["seed"] = config.ga.seed;
  summary["ga"] = {{"population", ga.population_size},
                   {"generations", ga.generations},
                   {"elites", ga.elite_count},
                   {"crossover", ga.crossover_prob},
                   {"mutation", ga.mutation_prob},
                   {"mutation_scale", ga.mutation_scale},
                   {"threads", ga.threads}};
  summary["ranges"] = ranges_json(ga.ranges);
  summary["ranges_source"] = choice.heuristic ? "heuristic" : "config";
  if (choice.heuristic) {
    const auto& h = *choice.heuristic;
    summary["heuristic"] = {{"transitions", h.transitions},
                            {"delta_omega", h.delta_omega},
                            {"width_lower_bound", h.width_lower_bound},
                            {"lifetime_au", number(h.lifetime_au)}};
  }
  summary["best_fitness"] = *result.best.fitness;
  summary["best_pulse"] = pulse_json(best);
  summary["on_boundary"] = ga.ranges.on_boundary(best);
  summary["evaluations"] = result.history.evaluations;

  if (!surrogate) {
    const auto& lp = static_cast<const LadderProblem&>(*problem);
    const auto res = lp.run(best, config.sample_stride);
    write_text(out / "populations.csv", populations_csv(res.record, scenario->spectrum->bound_count()));
    files.emplace_back("populations.csv");
    summary["time_step_au"] = lp.setup().time_step;
    summary["outcome"] = outcome_json(res, *scenario);
  }
  if (log != nullptr && !ga.ranges.on_boundary(best).empty()) {
    *log << "note: best chromosome sits on a range boundary\n";
  }

  RunConfig resolved = config;
  resolved.ga.ranges = ga.ranges;
  resolved.explicit_ranges = true;
  summary["wall_time_s"] = elapsed_seconds(start);
  write_summary(out, summary);
  files.emplace_back("summary.json");
  write_manifest(out, "optimize", &resolved, config.ga.seed, files);
  return summary;
}

json cmd_pulse_spectrum(const ChirpedPulseParams& pulse, const SpectrumRequest& request,
                        const fs::path& out) {
  pulse.validate();
  double lo = request.omega_min;
  double hi = request.omega_max;
  if (lo == 0.0 && hi == 0.0) {
    // Symmetric about omega0 so the middle sample sits on it.
    const double half = std::min(4.0 * bandwidth(pulse), pulse.frequency);
    lo = pulse.frequency - half;
    hi = pulse.frequency + half;
  }
  if (!(hi > lo) || request.points < 2) {
    throw std::invalid_argument("empty frequency range: need omega_max > omega_min and >= 2 points");
  }
  fs::create_directories(out);

  const double to_rad_s = units::angular_frequency_au;
  const double two_pi = 2.0 * std::acos(-1.0);
  std::ostringstream os;
  os << "omega_au,omega_rad_s,nu_hz,intensity\n";
  double peak_omega = lo, peak = -1.0;
  for (int k = 0; k < request.points; ++k) {
    const double w = 0.5 * (lo + hi) + 0.5 * (hi - lo) * (2.0 * k / (request.points - 1) - 1.0);
    const double i = spectrum(pulse, w);
    if (i > peak) {
      peak = i;
      peak_omega = w;
    }
    os << format_number(w) << ',' << format_number(w * to_rad_s) << ','
       << format_number(w * to_rad_s / two_pi) << ',' << format_number(i) << '\n';
  }
  write_text(out / "spectrum.csv", os.str());
  std::vector<std::string> files{"spectrum.csv"};

  json summary;
  summary["command"] = "pulse-spectrum";
  summary["pulse"] = pulse_json(pulse);
  summary["bandwidth_au"] = bandwidth(pulse);
  summary["omega_range_au"] = {lo, hi};
  summary["peak_omega_au"] = peak_omega;
  summary["peak_nu_hz"] = peak_omega * to_rad_s / two_pi;
  summary["peak_intensity"] = peak;

  if (request.fft) {
    const auto sampled = fft_spectrum(pulse);
    double fft_peak = 0.0, fft_peak_omega = 0.0;
    for (std::size_t k = 0; k < sampled.omega.size(); ++k) {
      if (sampled.intensity[k] > fft_peak) {
        fft_peak = sampled.intensity[k];
        fft_peak_omega = sampled.omega[k];
      }
    }
    std::ostringstream f;
    f << "omega_au,omega_rad_s,nu_hz,intensity,relative\n";
    for (std::size_t k = 0; k < sampled.omega.size(); ++k) {
      const double w = sampled.omega[k];
      if (w < lo || w > hi) continue;
      f << format_number(w) << ',' << format_number(w * to_rad_s) << ','
        << format_number(w * to_rad_s / two_pi) << ',' << format_number(sampled.intensity[k])
        << ',' << format_number(sampled.intensity[k] / fft_peak) << '\n';
    }
    write_text(out / "spectrum_fft.csv", f.str());
    files.emplace_back("spectrum_fft.csv");
    summary["fft_peak_omega_au"] = fft_peak_omega;
    summary["fft_peak_relative_offset"] = std::abs(fft_peak_omega - peak_omega) / peak_omega;
  }
  write_summary(out, summary);
  files.emplace_back("summary.json");
  const std::string pulse_ini = pulse_to_ini(pulse);
  write_text(out / "pulse.ini", pulse_ini);
  files.emplace_back("pulse.ini");
  write_manifest(out, "pulse-spectrum", nullptr, std::nullopt, files);
  return summary;
}

}  // namespace vibld
