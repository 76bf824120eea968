#include "vibld/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vibld/errors.hpp"

namespace vibld {

MorsePotential::MorsePotential(double de, double re, double a)
    : well_depth(de), equilibrium_distance(re), width(a) {
  if (!(de > 0.0) || !(re > 0.0) || !(a > 0.0)) {
    throw std::invalid_argument("Morse parameters must be positive");
  }
}

double MorsePotential::operator()(double r) const {
  const double x = 1.0 - std::exp(-width * (r - equilibrium_distance));
  return well_depth * x * x - well_depth;
}

double MorsePotential::lambda(double reduced_mass) const {
  return std::sqrt(2.0 * reduced_mass * well_depth) / width;
}

int MorsePotential::bound_level_count(double reduced_mass) const {
  return static_cast<int>(std::floor(lambda(reduced_mass) - 0.5)) + 1;
}

double MorsePotential::level_energy(int n, double reduced_mass) const {
  const double omega = width * std::sqrt(2.0 * well_depth / reduced_mass);
  const double v = n + 0.5;
  return -well_depth + omega * v - omega * omega * v * v / (4.0 * well_depth);
}

double HarmonicPotential::operator()(double r) const {
  const double x = r - center;
  return 0.5 * reduced_mass * omega * omega * x * x + quartic * x * x * x * x;
}

TabulatedCurve::TabulatedCurve(std::vector<double> r, std::vector<double> values, int order,
                               Kind kind)
    : r_(std::move(r)), y_(std::move(values)), order_(order), kind_(kind) {
  if (r_.size() != y_.size()) throw FormatError("abscissa and value counts differ");
  if (r_.size() < 4) {
    throw InsufficientDataError("tabulated curve needs at least 4 points, got " +
                                std::to_string(r_.size()));
  }
  if (order_ != 1 && order_ != 3) throw FormatError("interpolation order must be 1 or 3");
  for (std::size_t k = 1; k < r_.size(); ++k) {
    if (!(r_[k] > r_[k - 1])) {
      throw FormatError("abscissae must be strictly increasing (row " + std::to_string(k + 1) +
                        ")");
    }
  }
  second_.assign(r_.size(), 0.0);
  if (order_ == 1) return;

  // Not-a-knot spline: third derivative continuous across the second and
  // penultimate nodes. The end moments are eliminated, leaving a tridiagonal
  // system in M_1 .. M_{n-2}.
  const std::size_t n = r_.size();
  const std::size_t m = n - 2;
  std::vector<double> h(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) h[k] = r_[k + 1] - r_[k];

  std::vector<double> sub(m, 0.0), diag(m, 0.0), sup(m, 0.0), rhs(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = j + 1;
    sub[j] = h[k - 1];
    diag[j] = 2.0 * (h[k - 1] + h[k]);
    sup[j] = h[k];
    rhs[j] = 6.0 * ((y_[k + 1] - y_[k]) / h[k] - (y_[k] - y_[k - 1]) / h[k - 1]);
  }
  // M_0 = (1 + h0/h1) M_1 - (h0/h1) M_2
  const double h0 = h[0], h1 = h[1];
  diag[0] += h0 * (1.0 + h0 / h1);
  sup[0] -= h0 * h0 / h1;
  // M_{n-1} = (1 + hl/hp) M_{n-2} - (hl/hp) M_{n-3}
  const double hl = h[n - 2], hp = h[n - 3];
  diag[m - 1] += hl * (1.0 + hl / hp);
  sub[m - 1] -= hl * hl / hp;

  for (std::size_t j = 1; j < m; ++j) {
    const double w = sub[j] / diag[j - 1];
    diag[j] -= w * sup[j - 1];
    rhs[j] -= w * rhs[j - 1];
  }
  second_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t j = m - 1; j-- > 0;) {
    second_[j + 1] = (rhs[j] - sup[j] * second_[j + 2]) / diag[j];
  }
  second_[0] = (1.0 + h0 / h1) * second_[1] - (h0 / h1) * second_[2];
  second_[n - 1] = (1.0 + hl / hp) * second_[n - 2] - (hl / hp) * second_[n - 3];
}

double TabulatedCurve::operator()(double r) const {
  if (!(r >= r_.front() && r <= r_.back())) {
    std::ostringstream os;
    os.precision(17);
    os << "R = " << r << " outside tabulated range [" << r_.front() << ", " << r_.back() << "]";
    throw ExtrapolationError(os.str());
  }
  auto it = std::upper_bound(r_.begin(), r_.end(), r);
  std::size_t hi = static_cast<std::size_t>(it - r_.begin());
  if (hi > 0 && r_[hi - 1] == r) return y_[hi - 1];
  if (hi == r_.size()) return y_.back();
  const std::size_t lo = hi - 1;
  const double h = r_[hi] - r_[lo];
  const double a = (r_[hi] - r) / h;
  const double b = (r - r_[lo]) / h;
  double value = a * y_[lo] + b * y_[hi];
  if (order_ == 3) {
    value += ((a * a * a - a) * second_[lo] + (b * b * b - b) * second_[hi]) * h * h / 6.0;
  }
  return value;
}

namespace {

double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("non-numeric token '" + std::string(token) + "'", line);
  }
  return value;
}

}  // namespace

TabulatedCurve load_tabulated(const std::filesystem::path& path, TabulatedCurve::Kind kind,
                              int order) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open tabulated curve '" + path.string() + "'");
  std::vector<double> r, v;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream fields(text);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) {
      throw ParseError("expected 2 columns, found " + std::to_string(tokens.size()), line);
    }
    r.push_back(parse_number(tokens[0], line));
    v.push_back(parse_number(tokens[1], line));
  }
  try {
    return TabulatedCurve(std::move(r), std::move(v), order, kind);
  } catch (const FormatError& e) {
    if (dynamic_cast<const InsufficientDataError*>(&e) != nullptr) {
      throw InsufficientDataError(path.string() + ": " + e.what());
    }
    throw FormatError(path.string() + ": " + e.what());
  }
}

DipoleModel DipoleModel::decaying(double d0, double rd, double p) {
  DipoleModel m;
  m.form = Form::decaying;
  m.d0 = d0;
  m.rd = rd;
  m.p = p;
  return m;
}

DipoleModel DipoleModel::linear(double d0, double slope, double center) {
  DipoleModel m;
  m.form = Form::linear;
  m.d0 = d0;
  m.slope = slope;
  m.center = center;
  return m;
}

DipoleModel DipoleModel::constant(double d0) {
  DipoleModel m;
  m.form = Form::constant;
  m.d0 = d0;
  return m;
}

double DipoleModel::operator()(double r) const {
  switch (form) {
    case Form::decaying: {
      const double x = r / rd;
      return d0 * x * std::exp(-std::pow(x, p));
    }
    case Form::linear:
      return d0 + slope * (r - center);
    case Form::constant:
      return d0;
  }
  return 0.0;
}

double evaluate_potential(const PotentialModel& curve, double r) {
  return std::visit([r](const auto& c) { return c(r); }, curve);
}

double evaluate_dipole(const DipoleCurve& curve, double r) {
  return std::visit([r](const auto& c) { return c(r); }, curve);
}

std::vector<double> sample(const PotentialModel& curve, const std::vector<double>& r) {
  std::vector<double> out(r.size());
  std::visit(
      [&](const auto& c) {
        for (std::size_t k = 0; k < r.size(); ++k) out[k] = c(r[k]);
      },
      curve);
  return out;
}

std::vector<double> sample(const DipoleCurve& curve, const std::vector<double>& r) {
  std::vector<double> out(r.size());
  std::visit(
      [&](const auto& c) {
        for (std::size_t k = 0; k < r.size(); ++k) out[k] = c(r[k]);
      },
      curve);
  return out;
}

namespace {

struct Describer {
  std::string operator()(const MorsePotential& m) const {
    std::ostringstream os;
    os.precision(17);
    os << "morse(De=" << m.well_depth << ", Re=" << m.equilibrium_distance << ", a=" << m.width
       << ")";
    return os.str();
  }
  std::string operator()(const HarmonicPotential& h) const {
    std::ostringstream os;
    os.precision(17);
    os << "harmonic(mu=" << h.reduced_mass << ", omega=" << h.omega << ", R0=" << h.center
       << ", quartic=" << h.quartic << ")";
    return os.str();
  }
  std::string operator()(const TabulatedCurve& t) const {
    std::ostringstream os;
    os.precision(17);
    os << "tabulated(" << t.nodes().size() << " nodes, [" << t.front() << ", " << t.back()
       << "], order " << t.order() << ")";
    return os.str();
  }
  std::string operator()(const FunctionCurve& f) const { return "function(" + f.label + ")"; }
  std::string operator()(const DipoleModel& d) const {
    std::ostringstream os;
    os.precision(17);
    switch (d.form) {
      case DipoleModel::Form::decaying:
        os << "decaying(d0=" << d.d0 << ", Rd=" << d.rd << ", p=" << d.p << ")";
        break;
      case DipoleModel::Form::linear:
        os << "linear(d0=" << d.d0 << ", slope=" << d.slope << ", R0=" << d.center << ")";
        break;
      case DipoleModel::Form::constant:
        os << "constant(d0=" << d.d0 << ")";
        break;
    }
    return os.str();
  }
};

}  // namespace

std::string describe(const PotentialModel& curve) { return std::visit(Describer{}, curve); }
std::string describe(const DipoleCurve& curve) { return std::visit(Describer{}, curve); }

}  // namespace vibld
