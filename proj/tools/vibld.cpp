#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "vibld/commands.hpp"
#include "vibld/errors.hpp"

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI file applied on top of the preset")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "Built-in scenario: old20, old24, mld20, mld24, desk");
  cmd->add_option("--out", c.out, "Output directory (overrides [output] dir)");
  cmd->add_option("--seed", c.seed, "GA seed (overrides [ga] seed)");
  cmd->add_option("--threads", c.threads, "Fitness evaluation threads")->check(CLI::PositiveNumber);
}

vibld::RunConfig resolve(const Common& c) {
  vibld::RunConfig config = vibld::preset(c.preset.empty() ? "desk" : c.preset);
  if (!c.config.empty()) config = vibld::load_config(c.config, config);
  if (!c.out.empty()) config.output_dir = c.out;
  if (c.seed) config.ga.seed = *c.seed;
  if (c.threads) config.ga.threads = *c.threads;
  return config;
}

vibld::ChirpedPulseParams pulse_for(const vibld::RunConfig& config, const std::string& file) {
  if (!file.empty()) return vibld::load_pulse(file);
  if (config.pulse) return *config.pulse;
  throw vibld::ConfigError("no pulse: pass --pulse <file> or give a [pulse] section");
}

void print_outcome(const nlohmann::json& s) {
  if (!s.contains("outcome")) return;
  const auto& o = s["outcome"];
  std::cout << "final p_initial " << o["final_initial_population"].get<double>() << ", p_target "
            << o["final_target_population"].get<double>() << ", bound "
            << o["final_total_bound"].get<double>() << ", dissociated "
            << o["final_dissociation"].get<double>() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vibrational ladder descent with optimized chirped pulses"};
  app.set_version_flag("--version", vibld::version);
  app.require_subcommand(1);

  Common common;
  bool wavefunctions = false;
  bool surrogate = false;
  bool quiet = false;
  std::string pulse_file;
  vibld::SpectrumRequest request;

  auto* eig = app.add_subcommand("eigensolve", "Bound levels, lifetimes and the SDME map");
  add_common(eig, common);
  eig->add_flag("--wavefunctions", wavefunctions, "Also write wavefunctions.csv");

  auto* prop = app.add_subcommand("propagate", "Propagate the initial level under one pulse");
  add_common(prop, common);
  prop->add_option("--pulse", pulse_file, "Pulse file with a [pulse] section")
      ->check(CLI::ExistingFile);

  auto* opt = app.add_subcommand("optimize", "Genetic optimization of the chirped pulse");
  add_common(opt, common);
  opt->add_flag("--surrogate", surrogate, "Analytic test objective instead of propagation");
  opt->add_flag("-q,--quiet", quiet, "No per-generation log");

  auto* spec = app.add_subcommand("pulse-spectrum", "Optical spectrum of a pulse");
  add_common(spec, common);
  spec->add_option("--pulse", pulse_file, "Pulse file with a [pulse] section")
      ->check(CLI::ExistingFile);
  spec->add_option("--omega-min", request.omega_min, "Lower angular frequency, a.u.");
  spec->add_option("--omega-max", request.omega_max, "Upper angular frequency, a.u.");
  spec->add_option("--points", request.points, "Number of frequency samples");
  spec->add_flag("--fft", request.fft, "Also write the FFT spectrum of the sampled field");

  CLI11_PARSE(app, argc, argv);

  try {
    const vibld::RunConfig config = resolve(common);
    const auto out = config.output_dir;
    if (eig->parsed()) {
      const auto s = vibld::cmd_eigensolve(config, out, wavefunctions);
      std::cout << "bound levels: " << s["bound_count"].get<int>() << '\n';
      if (s.contains("ladder_warning")) {
        std::cerr << "warning: " << s["ladder_warning"].get<std::string>() << '\n';
      }
    } else if (prop->parsed()) {
      const auto s = vibld::cmd_propagate(config, pulse_for(config, pulse_file), out);
      if (s.contains("ladder_warning")) {
        std::cerr << "warning: " << s["ladder_warning"].get<std::string>() << '\n';
      }
      print_outcome(s);
    } else if (opt->parsed()) {
      const auto s = vibld::cmd_optimize(config, out, surrogate, quiet ? nullptr : &std::cerr);
      std::cout << "best fitness " << s["best_fitness"].get<double>() << '\n';
      print_outcome(s);
    } else if (spec->parsed()) {
      const auto s = vibld::cmd_pulse_spectrum(pulse_for(config, pulse_file), request, out);
      std::cout << "peak at omega " << s["peak_omega_au"].get<double>() << " a.u. ("
                << s["peak_nu_hz"].get<double>() << " Hz)\n";
    }
    std::cout << "wrote " << out.string() << '\n';
  } catch (const vibld::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const vibld::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const vibld::ChirpSignError& e) {
    std::cerr << "chirp sign error: " << e.what() << '\n';
    return 3;
  } catch (const vibld::HeuristicFailure& e) {
    std::cerr << "heuristic failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
