#include "vibld/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vibld/errors.hpp"

namespace vibld {

namespace pt = boost::property_tree;

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::vector<int> RunConfig::resolved_ladder() const {
  if (!ladder.empty()) return ladder;
  std::vector<int> out;
  for (int v = initial_level; v >= target_level; --v) out.push_back(v);
  return out;
}

void RunConfig::validate() const {
  if (!(initial_level > target_level) || target_level < 0) {
    throw ConfigError("scenario requires initial > target >= 0");
  }
  const auto l = resolved_ladder();
  if (l.size() < 2 || l.front() != initial_level || l.back() != target_level) {
    throw ConfigError("ladder must start at the initial level and end at the target level");
  }
  for (std::size_t k = 1; k < l.size(); ++k) {
    if (!(l[k] < l[k - 1])) throw ConfigError("ladder must be strictly descending");
  }
  if (scheme == Scheme::old && l.size() != static_cast<std::size_t>(initial_level - target_level + 1)) {
    throw ConfigError("one-rung ladder must visit every level between initial and target");
  }
  if (sample_stride < 1) throw ConfigError("propagation.sample_stride must be positive");
  if (time_step && !(*time_step > 0.0)) throw ConfigError("propagation.time_step must be positive");
  if (!(tail_widths > 0.0)) throw ConfigError("propagation.tail_widths must be positive");
}

namespace {

RunConfig krb_base() {
  RunConfig c;
  c.grid = RadialGrid(3.0, 143.0, 5600, krb::reduced_mass);
  c.potential.model = "morse";
  c.potential.p1 = krb::well_depth;
  c.potential.p2 = krb::equilibrium_distance;
  c.potential.p3 = krb::morse_width;
  c.dipole.model = "decaying";
  c.dipole.p1 = krb::dipole_scale;
  c.dipole.p2 = krb::dipole_range;
  c.dipole.p3 = krb::dipole_exponent;
  c.cap = CapSpec{100.0, 5e-6};
  c.time_step = 100.0;
  c.sample_stride = 1000;
  return c;
}

// Gene order: eps0, omega0, tau0, tau, chirp.
ParamRanges table_ranges(GeneRange eps, GeneRange omega, GeneRange delay, GeneRange width,
                         GeneRange chirp) {
  return ParamRanges({eps, omega, delay, width, chirp});
}

}  // namespace

std::vector<std::string> preset_names() { return {"old20", "old24", "mld20", "mld24", "desk"}; }

RunConfig preset(const std::string& name) {
  RunConfig c = krb_base();
  c.name = name;
  if (name == "old20") {
    c.scheme = Scheme::old;
    c.initial_level = 20;
    c.target_level = 10;
    c.ga.ranges = table_ranges({1.0e-3, 1.0e-2}, {3.1e-5, 3.6e-5}, {3.3e6, 3.5e7}, {1.0e6, 1.0e7},
                               {4.0e-13, 5.0e-12});
    c.pulse = ChirpedPulseParams{8.011e-3, 3.531e-5, 4.104e7, 9.798e6, 6.259e-13};
    c.explicit_ranges = true;
  } else if (name == "old24") {
    c.scheme = Scheme::old;
    c.initial_level = 24;
    c.target_level = 10;
    c.ga.ranges = table_ranges({1.0e-3, 1.0e-2}, {3.3e-5, 3.6e-5}, {3.3e6, 3.5e7}, {1.0e6, 1.0e7},
                               {6.0e-13, 7.0e-12});
    c.pulse = ChirpedPulseParams{9.168e-3, 3.723e-5, 3.723e7, 1.146e7, 7.300e-13};
    c.explicit_ranges = true;
  } else if (name == "mld20") {
    c.scheme = Scheme::mld;
    c.initial_level = 20;
    c.target_level = 10;
    c.ladder = {20, 16, 13, 10};
    c.ga.ranges = table_ranges({1.0e-3, 1.0e-2}, {1.0e-4, 1.8e-4}, {1.0e6, 1.0e7}, {3.2e5, 3.2e6},
                               {1.8e-12, 1.6e-11});
    c.pulse = ChirpedPulseParams{5.154e-3, 1.211e-4, 4.900e6, 1.489e6, 8.254e-12};
    c.explicit_ranges = true;
  } else if (name == "mld24") {
    c.scheme = Scheme::mld;
    c.initial_level = 24;
    c.target_level = 10;
    c.ladder = {24, 17, 13, 10};
    c.ga.ranges = table_ranges({1.0e-3, 1.0e-2}, {1.3e-4, 1.6e-4}, {3.3e6, 3.5e7}, {1.0e6, 1.0e7},
                               {1.0e-13, 1.0e-12});
    c.pulse = ChirpedPulseParams{5.720e-3, 1.378e-4, 4.835e6, 1.003e6, 5.832e-12};
    c.explicit_ranges = true;
  } else if (name == "desk") {
    c.scheme = Scheme::old;
    c.initial_level = 20;
    c.target_level = 10;
    c.grid = RadialGrid(5.0, 45.0, 1024, krb::reduced_mass);
    c.cap = CapSpec{35.0, 1e-5};
    c.time_step = 200.0;
    c.sample_stride = 20;
    c.ga.population_size = 12;
    c.ga.generations = 6;
    c.ga.seed = 1;
    c.explicit_ranges = false;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.output_dir = "out/" + name;
  return c;
}

std::optional<ReferenceOutcome> preset_reference(const std::string& name) {
  if (name == "old20") return ReferenceOutcome{0.25, 0.55};
  if (name == "old24") return ReferenceOutcome{0.05, 0.45};
  if (name == "mld20") return ReferenceOutcome{0.30, 0.40};
  if (name == "mld24") return ReferenceOutcome{0.48, 0.52};
  return std::nullopt;
}

namespace {

// Field-free runs are allowed in pulse files: eps0 = 0 is accepted.
void check_pulse(ChirpedPulseParams p) {
  if (p.amplitude == 0.0) p.amplitude = 1.0;
  p.validate();
}

struct Reader {
  const pt::ptree& tree;
  std::string origin;

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto s = tree.get_child_optional(section);
    if (!s) return std::nullopt;
    auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& why) const {
    throw ConfigError(origin + ": [" + section + "] " + key + ": " + why);
  }

  double parse_double(const std::string& section, const std::string& key,
                      const std::string& text) const {
    double x = 0.0;
    const char* b = text.data();
    const char* e = text.data() + text.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && *(e - 1) == ' ') --e;
    if (b < e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || ptr != e) fail(section, key, "expected a number, got '" + text + "'");
    return x;
  }

  long long parse_integer(const std::string& section, const std::string& key,
                          const std::string& text) const {
    long long x = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(section, key, "expected an integer, got '" + text + "'");
    }
    return x;
  }

  void number(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) out = parse_double(section, key, *v);
  }
  void integer(const std::string& section, const std::string& key, int& out) const {
    if (auto v = raw(section, key)) out = static_cast<int>(parse_integer(section, key, *v));
  }
  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }

  std::vector<double> list(const std::string& section, const std::string& key,
                           const std::string& value) const {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(parse_double(section, key, item));
    return out;
  }
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"scenario", {"name", "scheme", "initial", "target", "ladder"}},
      {"grid", {"r_min", "r_max", "points", "reduced_mass"}},
      {"potential", {"model", "well_depth", "equilibrium", "width", "omega", "center", "quartic",
                     "file", "order"}},
      {"dipole", {"model", "d0", "rd", "p", "slope", "center", "file", "order"}},
      {"cap", {"enabled", "onset", "strength"}},
      {"propagation", {"time_step", "sample_stride", "tail_widths"}},
      {"pulse", {"eps0", "omega0", "tau0", "tau", "chirp"}},
      {"ga", {"population", "generations", "elites", "crossover", "mutation", "mutation_scale",
              "seed", "threads"}},
      {"ranges", {"eps0", "omega0", "tau0", "tau", "chirp"}},
      {"heuristics", {"width_span", "delay_factor", "lifetime_margin"}},
      {"output", {"dir"}},
  };
  return s;
}

void check_schema(const pt::ptree& tree, const std::string& origin) {
  for (const auto& [section, body] : tree) {
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError(origin + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
}

void read_curve(const Reader& r, const std::string& section, CurveSpec& spec, bool potential) {
  const std::string before = spec.model;
  r.text(section, "model", spec.model);
  if (spec.model != before) spec = CurveSpec{spec.model, 0.0, 0.0, 0.0, {}, 3};
  if (spec.model == "tabulated") {
    std::string f;
    r.text(section, "file", f);
    if (!f.empty()) spec.file = f;
    r.integer(section, "order", spec.order);
    if (spec.file.empty()) r.fail(section, "file", "required for tabulated curves");
    return;
  }
  if (potential) {
    if (spec.model == "morse") {
      r.number(section, "well_depth", spec.p1);
      r.number(section, "equilibrium", spec.p2);
      r.number(section, "width", spec.p3);
    } else if (spec.model == "harmonic") {
      r.number(section, "omega", spec.p1);
      r.number(section, "center", spec.p2);
      r.number(section, "quartic", spec.p3);
    } else {
      r.fail(section, "model", "expected morse, harmonic or tabulated");
    }
  } else {
    if (spec.model == "decaying") {
      r.number(section, "d0", spec.p1);
      r.number(section, "rd", spec.p2);
      r.number(section, "p", spec.p3);
    } else if (spec.model == "linear") {
      r.number(section, "d0", spec.p1);
      r.number(section, "slope", spec.p2);
      r.number(section, "center", spec.p3);
    } else if (spec.model == "constant") {
      r.number(section, "d0", spec.p1);
    } else {
      r.fail(section, "model", "expected decaying, linear, constant or tabulated");
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig c, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  check_schema(tree, origin);
  const Reader r{tree, origin};

  r.text("scenario", "name", c.name);
  if (auto s = r.raw("scenario", "scheme")) {
    if (*s == "old") {
      c.scheme = Scheme::old;
    } else if (*s == "mld") {
      c.scheme = Scheme::mld;
    } else {
      r.fail("scenario", "scheme", "expected old or mld");
    }
  }
  r.integer("scenario", "initial", c.initial_level);
  r.integer("scenario", "target", c.target_level);
  if (auto s = r.raw("scenario", "ladder")) {
    c.ladder.clear();
    for (double v : r.list("scenario", "ladder", *s)) c.ladder.push_back(static_cast<int>(v));
  }
  if (c.scheme == Scheme::old && !r.raw("scenario", "ladder")) c.ladder.clear();

  double rmin = c.grid.r_min, rmax = c.grid.r_max, mu = c.grid.reduced_mass;
  int points = c.grid.n_points;
  r.number("grid", "r_min", rmin);
  r.number("grid", "r_max", rmax);
  r.integer("grid", "points", points);
  r.number("grid", "reduced_mass", mu);
  try {
    c.grid = RadialGrid(rmin, rmax, points, mu);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": [grid] " + e.what());
  }

  read_curve(r, "potential", c.potential, true);
  read_curve(r, "dipole", c.dipole, false);

  if (auto s = r.raw("cap", "enabled"); s && (*s == "false" || *s == "0" || *s == "no")) {
    c.cap.reset();
  } else if (r.raw("cap", "onset") || r.raw("cap", "strength") || s) {
    CapSpec cap = c.cap.value_or(CapSpec{});
    r.number("cap", "onset", cap.onset);
    r.number("cap", "strength", cap.strength);
    try {
      cap.validate(c.grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": [cap] " + e.what());
    }
    c.cap = cap;
  }

  if (auto s = r.raw("propagation", "time_step")) {
    if (*s == "auto") {
      c.time_step.reset();
    } else {
      c.time_step = r.parse_double("propagation", "time_step", *s);
    }
  }
  r.integer("propagation", "sample_stride", c.sample_stride);
  r.number("propagation", "tail_widths", c.tail_widths);

  if (auto section = tree.get_child_optional("pulse"); section && !section->empty()) {
    ChirpedPulseParams p = c.pulse.value_or(ChirpedPulseParams{});
    r.number("pulse", "eps0", p.amplitude);
    r.number("pulse", "omega0", p.frequency);
    r.number("pulse", "tau0", p.delay);
    r.number("pulse", "tau", p.width);
    r.number("pulse", "chirp", p.chirp);
    try {
      check_pulse(p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": [pulse] " + e.what());
    }
    c.pulse = p;
  }

  r.integer("ga", "population", c.ga.population_size);
  r.integer("ga", "generations", c.ga.generations);
  r.integer("ga", "elites", c.ga.elite_count);
  r.number("ga", "crossover", c.ga.crossover_prob);
  r.number("ga", "mutation", c.ga.mutation_prob);
  r.number("ga", "mutation_scale", c.ga.mutation_scale);
  if (auto s = r.raw("ga", "seed")) {
    c.ga.seed = static_cast<std::uint64_t>(r.parse_integer("ga", "seed", *s));
  }
  r.integer("ga", "threads", c.ga.threads);

  if (auto section = tree.get_child_optional("ranges"); section && !section->empty()) {
    auto ranges = c.ga.ranges;
    for (std::size_t k = 0; k < ChirpedPulseParams::gene_count; ++k) {
      const std::string key = ChirpedPulseParams::gene_names[k];
      if (auto s = r.raw("ranges", key)) {
        const auto v = r.list("ranges", key, *s);
        if (v.size() != 2) r.fail("ranges", key, "expected 'min, max'");
        ranges.genes[k] = GeneRange{v[0], v[1]};
      } else if (!c.explicit_ranges) {
        r.fail("ranges", key, "missing; give all five genes or none");
      }
    }
    try {
      ranges.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": [ranges] " + e.what());
    }
    c.ga.ranges = ranges;
    c.explicit_ranges = true;
  }

  r.number("heuristics", "width_span", c.heuristics.width_span);
  r.number("heuristics", "delay_factor", c.heuristics.delay_factor);
  r.number("heuristics", "lifetime_margin", c.heuristics.lifetime_margin);

  std::string dir;
  r.text("output", "dir", dir);
  if (!dir.empty()) c.output_dir = dir;

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base), path.string());
}

namespace {

void write_curve(std::ostream& os, const char* section, const CurveSpec& s, bool potential) {
  os << "[" << section << "]\n";
  os << "model = " << s.model << "\n";
  if (s.model == "tabulated") {
    os << "file = " << s.file.string() << "\norder = " << s.order << "\n\n";
    return;
  }
  const char* names[3];
  if (potential && s.model == "morse") {
    names[0] = "well_depth"; names[1] = "equilibrium"; names[2] = "width";
  } else if (potential) {
    names[0] = "omega"; names[1] = "center"; names[2] = "quartic";
  } else if (s.model == "decaying") {
    names[0] = "d0"; names[1] = "rd"; names[2] = "p";
  } else if (s.model == "linear") {
    names[0] = "d0"; names[1] = "slope"; names[2] = "center";
  } else {
    os << "d0 = " << format_number(s.p1) << "\n\n";
    return;
  }
  os << names[0] << " = " << format_number(s.p1) << "\n";
  os << names[1] << " = " << format_number(s.p2) << "\n";
  os << names[2] << " = " << format_number(s.p3) << "\n\n";
}

}  // namespace

std::string pulse_to_ini(const ChirpedPulseParams& p) {
  std::ostringstream os;
  os << "[pulse]\n";
  os << "eps0 = " << format_number(p.amplitude) << "\n";
  os << "omega0 = " << format_number(p.frequency) << "\n";
  os << "tau0 = " << format_number(p.delay) << "\n";
  os << "tau = " << format_number(p.width) << "\n";
  os << "chirp = " << format_number(p.chirp) << "\n";
  return os.str();
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  os << "[scenario]\n";
  os << "name = " << c.name << "\n";
  os << "scheme = " << (c.scheme == Scheme::old ? "old" : "mld") << "\n";
  os << "initial = " << c.initial_level << "\n";
  os << "target = " << c.target_level << "\n";
  if (!c.ladder.empty()) {
    os << "ladder = ";
    for (std::size_t k = 0; k < c.ladder.size(); ++k) os << (k ? ", " : "") << c.ladder[k];
    os << "\n";
  }
  os << "\n[grid]\n";
  os << "r_min = " << format_number(c.grid.r_min) << "\n";
  os << "r_max = " << format_number(c.grid.r_max) << "\n";
  os << "points = " << c.grid.n_points << "\n";
  os << "reduced_mass = " << format_number(c.grid.reduced_mass) << "\n\n";
  write_curve(os, "potential", c.potential, true);
  write_curve(os, "dipole", c.dipole, false);
  os << "[cap]\n";
  if (c.cap) {
    os << "enabled = true\nonset = " << format_number(c.cap->onset)
       << "\nstrength = " << format_number(c.cap->strength) << "\n\n";
  } else {
    os << "enabled = false\n\n";
  }
  os << "[propagation]\n";
  os << "time_step = " << (c.time_step ? format_number(*c.time_step) : std::string("auto")) << "\n";
  os << "sample_stride = " << c.sample_stride << "\n";
  os << "tail_widths = " << format_number(c.tail_widths) << "\n\n";
  if (c.pulse) os << pulse_to_ini(*c.pulse) << "\n";
  os << "[ga]\n";
  os << "population = " << c.ga.population_size << "\n";
  os << "generations = " << c.ga.generations << "\n";
  os << "elites = " << c.ga.elite_count << "\n";
  os << "crossover = " << format_number(c.ga.crossover_prob) << "\n";
  os << "mutation = " << format_number(c.ga.mutation_prob) << "\n";
  os << "mutation_scale = " << format_number(c.ga.mutation_scale) << "\n";
  os << "seed = " << c.ga.seed << "\n";
  os << "threads = " << c.ga.threads << "\n\n";
  if (c.explicit_ranges) {
    os << "[ranges]\n";
    for (std::size_t k = 0; k < ChirpedPulseParams::gene_count; ++k) {
      os << ChirpedPulseParams::gene_names[k] << " = " << format_number(c.ga.ranges.genes[k].min)
         << ", " << format_number(c.ga.ranges.genes[k].max) << "\n";
    }
    os << "\n";
  }
  os << "[heuristics]\n";
  os << "width_span = " << format_number(c.heuristics.width_span) << "\n";
  os << "delay_factor = " << format_number(c.heuristics.delay_factor) << "\n";
  os << "lifetime_margin = " << format_number(c.heuristics.lifetime_margin) << "\n\n";
  os << "[output]\ndir = " << c.output_dir.string() << "\n";
  return os.str();
}

ChirpedPulseParams load_pulse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pulse file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  pt::ptree tree;
  try {
    std::istringstream s(buffer.str());
    pt::read_ini(s, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(path.string() + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r{tree, path.string()};
  ChirpedPulseParams p;
  const std::pair<const char*, double*> fields[] = {{"eps0", &p.amplitude},
                                                    {"omega0", &p.frequency},
                                                    {"tau0", &p.delay},
                                                    {"tau", &p.width},
                                                    {"chirp", &p.chirp}};
  for (const auto& [key, dst] : fields) {
    auto v = r.raw("pulse", key);
    if (!v) r.fail("pulse", key, "missing");
    *dst = r.parse_double("pulse", key, *v);
  }
  try {
    check_pulse(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return p;
}

PotentialModel make_potential(const CurveSpec& s, double reduced_mass) {
  if (s.model == "morse") return MorsePotential(s.p1, s.p2, s.p3);
  if (s.model == "harmonic") return HarmonicPotential{reduced_mass, s.p1, s.p2, s.p3};
  if (s.model == "tabulated") return load_tabulated(s.file, TabulatedCurve::Kind::potential, s.order);
  throw ConfigError("unknown potential model '" + s.model + "'");
}

DipoleCurve make_dipole(const CurveSpec& s) {
  if (s.model == "decaying") return DipoleModel::decaying(s.p1, s.p2, s.p3);
  if (s.model == "linear") return DipoleModel::linear(s.p1, s.p2, s.p3);
  if (s.model == "constant") return DipoleModel::constant(s.p1);
  if (s.model == "tabulated") return load_tabulated(s.file, TabulatedCurve::Kind::dipole, s.order);
  throw ConfigError("unknown dipole model '" + s.model + "'");
}

}  // namespace vibld
