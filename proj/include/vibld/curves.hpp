#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace vibld {

/// Morse well V(R) = De (1 - exp(-a (R - Re)))^2 - De, zero at dissociation.
struct MorsePotential {
  double well_depth;           // De, hartree
  double equilibrium_distance; // Re, bohr
  double width;                // a, 1/bohr

  MorsePotential(double de, double re, double a);
  double operator()(double r) const;

  /// Closed-form level count floor(lambda - 1/2) + 1, lambda = sqrt(2 mu De) / a.
  int bound_level_count(double reduced_mass) const;
  /// Closed-form level energy of level n (hbar = 1).
  double level_energy(int n, double reduced_mass) const;
  double lambda(double reduced_mass) const;
};

/// V(R) = mu omega^2 (R - R0)^2 / 2 + quartic (R - R0)^4.
struct HarmonicPotential {
  double reduced_mass;
  double omega;
  double center;
  double quartic = 0.0;

  double operator()(double r) const;
};

/// Cubic (not-a-knot) or linear interpolant through sorted samples.
/// Queries outside [front, back] throw ExtrapolationError.
class TabulatedCurve {
 public:
  enum class Kind { potential, dipole };

  TabulatedCurve(std::vector<double> r, std::vector<double> values, int order = 3,
                 Kind kind = Kind::potential);

  double operator()(double r) const;

  const std::vector<double>& nodes() const { return r_; }
  const std::vector<double>& values() const { return y_; }
  int order() const { return order_; }
  Kind kind() const { return kind_; }
  double front() const { return r_.front(); }
  double back() const { return r_.back(); }

 private:
  std::vector<double> r_;
  std::vector<double> y_;
  std::vector<double> second_; // spline second derivatives at the nodes
  int order_;
  Kind kind_;
};

/// Reads a two-column (R, value) text file in atomic units.
/// Columns are separated by whitespace and/or a comma; '#' starts a comment.
TabulatedCurve load_tabulated(const std::filesystem::path& path, TabulatedCurve::Kind kind,
                              int order = 3);

/// Arbitrary analytic curve; used for toy models and tests.
struct FunctionCurve {
  std::function<double(double)> fn;
  std::string label;
  double operator()(double r) const { return fn(r); }
};

using PotentialModel = std::variant<MorsePotential, HarmonicPotential, TabulatedCurve, FunctionCurve>;

/// Permanent dipole D(R) in e*bohr.
struct DipoleModel {
  enum class Form {
    decaying, // d0 (R / Rd) exp(-(R / Rd)^p)
    linear,   // d0 + slope (R - center)
    constant, // d0
  };

  Form form = Form::decaying;
  double d0 = 0.0;
  double rd = 1.0;
  double p = 4.0;
  double slope = 0.0;
  double center = 0.0;

  static DipoleModel decaying(double d0, double rd, double p);
  static DipoleModel linear(double d0, double slope, double center);
  static DipoleModel constant(double d0);

  double operator()(double r) const;
};

using DipoleCurve = std::variant<DipoleModel, TabulatedCurve, FunctionCurve>;

double evaluate_potential(const PotentialModel& curve, double r);
double evaluate_dipole(const DipoleCurve& curve, double r);

/// Samples a curve on a set of abscissae.
std::vector<double> sample(const PotentialModel& curve, const std::vector<double>& r);
std::vector<double> sample(const DipoleCurve& curve, const std::vector<double>& r);

std::string describe(const PotentialModel& curve);
std::string describe(const DipoleCurve& curve);

}  // namespace vibld
