#include <doctest.h>

#include <chrono>
#include <cmath>

#include "support.hpp"
#include "vibld/commands.hpp"
#include "vibld/errors.hpp"

using namespace vibld;
using json = nlohmann::json;

namespace {

// Desk scenario shrunk further so command tests stay fast.
RunConfig small_desk() {
  RunConfig c = preset("desk");
  c.grid = RadialGrid(5.0, 45.0, 512, krb::reduced_mass);
  return c;
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("presets") {
  const auto names = preset_names();
  CHECK(names.size() == 5);
  for (const auto& n : names) CHECK_NOTHROW(preset(n).validate());
  CHECK_THROWS_AS(preset("nope"), ConfigError);

  const auto o = preset("old20");
  CHECK(o.grid.r_max - o.grid.r_min == 140.0);
  CHECK(o.grid.n_points == 5600);
  REQUIRE(o.cap);
  CHECK(o.cap->onset == 100.0);
  CHECK(o.cap->strength == 5e-6);
  CHECK(o.resolved_ladder() == std::vector<int>{20, 19, 18, 17, 16, 15, 14, 13, 12, 11, 10});
  CHECK(o.ga.ranges.frequency().min == 3.1e-5);
  CHECK(o.pulse->delay == 4.104e7);
  CHECK(o.ga.population_size == 40);

  CHECK(preset("mld24").resolved_ladder() == std::vector<int>{24, 17, 13, 10});
  CHECK(preset("mld20").resolved_ladder() == std::vector<int>{20, 16, 13, 10});
  CHECK(preset("mld24").pulse->chirp == 5.832e-12);
  CHECK(preset_reference("mld24")->target_population == 0.48);
  CHECK_FALSE(preset_reference("desk"));
}

TEST_CASE("ini round trip") {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const auto text = to_ini(c);
    const auto back = parse_config(text, RunConfig{}, "roundtrip");
    CHECK(to_ini(back) == text);
    CHECK(back.grid.n_points == c.grid.n_points);
    CHECK(back.ga.ranges.genes[4].max == c.ga.ranges.genes[4].max);
    CHECK(back.pulse == c.pulse);
  }
}

TEST_CASE("config overrides and errors") {
  const auto base = preset("desk");
  const auto c = parse_config(
      "[scenario]\nname = mine\ninitial = 18\ntarget = 12\n[ga]\nseed = 77\npopulation = 8\n"
      "[propagation]\ntime_step = auto\n[cap]\nenabled = false\n",
      base, "t.ini");
  CHECK(c.name == "mine");
  CHECK(c.resolved_ladder().front() == 18);
  CHECK(c.ga.seed == 77);
  CHECK(c.ga.population_size == 8);
  CHECK_FALSE(c.time_step);
  CHECK_FALSE(c.cap);
  CHECK(c.grid.n_points == base.grid.n_points);

  auto message = [&](const std::string& text) {
    try {
      parse_config(text, base, "t.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[grid]\npoints = many\n").find("[grid] points") != std::string::npos);
  CHECK(message("[grid]\nspacing = 1\n").find("unknown key 'spacing'") != std::string::npos);
  CHECK(message("[extra]\na = 1\n").find("unknown section") != std::string::npos);
  CHECK(message("[scenario]\nscheme = fast\n").find("scheme") != std::string::npos);
  CHECK(message("[scenario]\nscheme = mld\nladder = 20, 13, 16, 10\n").find("descending") !=
        std::string::npos);
  CHECK(message("[scenario]\ninitial = 5\ntarget = 9\n").find("initial > target") !=
        std::string::npos);
  CHECK(message("[ranges]\neps0 = 1e-3, 2e-2\n").find("[ranges]") != std::string::npos);
  CHECK(message("[cap]\nonset = 99\n").find("[cap]") != std::string::npos);
  CHECK(message("[grid\n").find("line 1") != std::string::npos);
}

TEST_CASE("tabulated curves through the config") {
  TempDir tmp;
  std::string rows;
  const MorsePotential m(krb::well_depth, krb::equilibrium_distance, krb::morse_width);
  for (int k = 0; k <= 200; ++k) {
    const double r = 4.0 + 0.25 * k;
    rows += format_number(r) + " " + format_number(m(r)) + "\n";
  }
  const auto file = tmp.write("pec.dat", rows);
  const auto c = parse_config("[potential]\nmodel = tabulated\nfile = " + file.string() + "\n",
                              preset("desk"), "t.ini");
  const auto v = make_potential(c.potential, c.grid.reduced_mass);
  CHECK(std::holds_alternative<TabulatedCurve>(v));
  CHECK(evaluate_potential(v, 11.0) == doctest::Approx(-krb::well_depth).epsilon(1e-12));
}

TEST_CASE("pulse files") {
  TempDir tmp;
  const ChirpedPulseParams p{8.011e-3, 3.531e-5, 4.104e7, 9.798e6, 6.259e-13};
  const auto file = tmp.write("p.ini", pulse_to_ini(p));
  CHECK(load_pulse(file) == p);
  const auto off = tmp.write("off.ini", "[pulse]\neps0 = 0\nomega0 = 1e-5\ntau0 = 1e5\ntau = 2e4\nchirp = 0\n");
  CHECK(load_pulse(off).amplitude == 0.0);
  const auto missing = tmp.write("m.ini", "[pulse]\neps0 = 1e-3\n");
  CHECK_THROWS_AS(load_pulse(missing), ConfigError);
  const auto negative = tmp.write("n.ini", "[pulse]\neps0 = 1e-3\nomega0 = 1e-5\ntau0 = 1e5\ntau = -2\nchirp = 0\n");
  CHECK_THROWS_AS(load_pulse(negative), ConfigError);
}

TEST_CASE("number formatting and hashing") {
  for (double x : {0.1, 1.0 / 3.0, 6.259e-13, -2.5e300, 5600.0}) {
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("eigensolve command") {
  TempDir tmp;
  const auto cfg = small_desk();
  const auto out = tmp.path() / "nested" / "eig";
  const auto s = cmd_eigensolve(cfg, out, true);
  CHECK(s["bound_count"].get<int>() == 30);
  CHECK(s["cap"]["onset"].get<double>() == 35.0);
  for (const char* f : {"energies.csv", "sdme.csv", "wavefunctions.csv", "summary.json",
                        "manifest.json", "config.ini"}) {
    CHECK(std::filesystem::exists(out / f));
  }
  CHECK(count_lines(read_file(out / "energies.csv")) == 31);
  const auto energies = read_file(out / "energies.csv");
  const auto sdme = read_file(out / "sdme.csv");
  cmd_eigensolve(cfg, out, false);
  CHECK(read_file(out / "energies.csv") == energies);
  CHECK(read_file(out / "sdme.csv") == sdme);
  const auto manifest = json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["config_hash"].get<std::string>() == fnv1a_hex(read_file(out / "config.ini")));
  CHECK(manifest["versions"].contains("fftw"));
  // the written config reproduces the run
  const auto again = load_config(out / "config.ini", RunConfig{});
  CHECK(to_ini(again) == to_ini(cfg));
}

TEST_CASE("full-scale presets carry the published absorber") {
  const auto c = preset("old24");
  CHECK(c.cap->onset == 100.0);
  CHECK(c.cap->strength == 5e-6);
}

TEST_CASE("propagate command") {
  TempDir tmp;
  auto cfg = small_desk();
  cfg.sample_stride = 7;
  const ChirpedPulseParams off{0.0, 2e-5, 1e4, 2e3, 0.0};
  const auto s = cmd_propagate(cfg, off, tmp.path());
  const auto& o = s["outcome"];
  CHECK(o["final_initial_population"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(o["final_target_population"].get<double>() < 1e-10);
  const auto steps = o["steps"].get<std::size_t>();
  CHECK(steps == 90); // (1e4 + 4 * 2e3) / 200
  const auto rows = count_lines(read_file(tmp.path() / "populations.csv")) - 1;
  CHECK(rows == static_cast<int>((steps + 6) / 7 + 1));
  const auto header = read_file(tmp.path() / "populations.csv").substr(0, 40);
  CHECK(header.rfind("t_au,t_ns,field,p_0", 0) == 0);
}

TEST_CASE("optimize command in surrogate mode") {
  TempDir tmp;
  auto cfg = preset("old20");
  cfg.ga.seed = 2024;
  const auto start = std::chrono::steady_clock::now();
  const auto s = cmd_optimize(cfg, tmp.path() / "a", true);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 1.0);
  CHECK(s["seed"].get<std::uint64_t>() == 2024);
  CHECK(s["mode"] == "surrogate");
  CHECK(s["ga"]["population"].get<int>() == 40);
  cmd_optimize(cfg, tmp.path() / "b", true);
  for (const char* f : {"history.csv", "best_pulse.ini", "config.ini", "manifest.json"}) {
    CHECK(read_file(tmp.path() / "a" / f) == read_file(tmp.path() / "b" / f));
  }
  CHECK(count_lines(read_file(tmp.path() / "a" / "history.csv")) == 11);
  const auto best = load_pulse(tmp.path() / "a" / "best_pulse.ini");
  CHECK(cfg.ga.ranges.contains(best));
  const auto manifest = json::parse(read_file(tmp.path() / "a" / "manifest.json"));
  CHECK(manifest["seed"].get<std::uint64_t>() == 2024);

  cfg.ga.seed = 2025;
  cmd_optimize(cfg, tmp.path() / "c", true);
  CHECK(read_file(tmp.path() / "a" / "history.csv") != read_file(tmp.path() / "c" / "history.csv"));
}

TEST_CASE("optimize refuses ladders without a positive chirp") {
  TempDir tmp;
  auto cfg = small_desk();
  cfg.scheme = Scheme::mld;
  cfg.ladder = {20, 16, 13, 10};
  CHECK_THROWS_AS(cmd_optimize(cfg, tmp.path(), false), ChirpSignError);
  const auto s = cmd_eigensolve(cfg, tmp.path(), false);
  CHECK(s.contains("ladder_warning"));
}

TEST_CASE("pulse spectrum command") {
  TempDir tmp;
  const ChirpedPulseParams p{8.011e-3, 3.531e-5, 4.104e7, 9.798e6, 6.259e-13};
  const auto s = cmd_pulse_spectrum(p, {}, tmp.path());
  CHECK(s["peak_omega_au"].get<double>() == p.frequency);
  // 1e11 - 1e12 Hz: infrared
  CHECK(s["peak_nu_hz"].get<double>() > 1e11);
  CHECK(s["peak_nu_hz"].get<double>() < 1e13);
  CHECK(count_lines(read_file(tmp.path() / "spectrum.csv")) == 2002);

  SpectrumRequest r;
  r.omega_min = 3e-5;
  r.omega_max = 4e-5;
  r.points = 101;
  r.fft = true;
  const auto f = cmd_pulse_spectrum(p, r, tmp.path() / "fft");
  CHECK(std::filesystem::exists(tmp.path() / "fft" / "spectrum_fft.csv"));
  CHECK(f["fft_peak_relative_offset"].get<double>() < 0.02);

  SpectrumRequest empty;
  empty.omega_min = 4e-5;
  empty.omega_max = 3e-5;
  CHECK_THROWS_AS(cmd_pulse_spectrum(p, empty, tmp.path()), std::invalid_argument);
}
