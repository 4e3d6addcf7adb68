#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cfdyn {

enum class PotentialKind { kepler, perturbed, power, custom };

// Callback contract for user-defined potentials: U and U' on an open
// radial domain, plus a finite bracket for root searches.
struct CustomSpec {
  std::function<double(double)> value;       // U(r)
  std::function<double(double)> derivative;  // U'(r)
  // optional; finite differences of U' otherwise
  std::function<double(double)> second_derivative;
  double domain_lo = 0.0;
  double domain_hi = std::numeric_limits<double>::infinity();
  double bracket_lo = 1e-3;
  double bracket_hi = 1e3;
};

// A central potential U(r) with F(r) = -U'(r), mass normalized to 1.
// Default-constructed instances are the free particle (kepler with k = 0);
// use the factories.
class RadialPotential {
 public:
  RadialPotential() = default;
  static RadialPotential kepler(double k);
  // U(r) = -k/r - kappa/(2 r^2)
  static RadialPotential perturbed(double k, double kappa);
  // U'(r) = k r^p  (attractive central force -k r^p for k > 0)
  static RadialPotential power_law(double k, double p);
  static RadialPotential custom(CustomSpec spec);

  PotentialKind kind() const { return kind_; }
  double k() const { return k_; }
  double kappa() const { return kappa_; }
  double exponent() const { return p_; }

  double domain_lo() const { return domain_lo_; }
  double domain_hi() const { return domain_hi_; }
  double bracket_lo() const { return bracket_lo_; }
  double bracket_hi() const { return bracket_hi_; }
  bool in_domain(double r) const { return r > domain_lo_ && r < domain_hi_; }

  double value(double r) const;       // U(r)
  double derivative(double r) const;  // U'(r)
  // U''(r); analytic for the built-in kinds, finite differences for custom
  double second_derivative(double r) const;
  double force(double r) const { return -derivative(r); }
  double force_derivative(double r) const { return -second_derivative(r); }
  // (U(r), U'(r)) with domain check; the one entry point used by callers.
  std::pair<double, double> eval(double r) const;

 private:
  void check_domain(double r) const;

  PotentialKind kind_ = PotentialKind::kepler;
  double k_ = 0.0, kappa_ = 0.0, p_ = 0.0;
  double domain_lo_ = 0.0;
  double domain_hi_ = std::numeric_limits<double>::infinity();
  double bracket_lo_ = 0.0, bracket_hi_ = 0.0;
  std::shared_ptr<const CustomSpec> custom_;
};

// Equilibrium point of the central force: root of U'(r) on [0, inf].
// r = inf is admitted and kept symbolic so downstream code never
// evaluates U there; U_eq carries the normalization value.
struct Equilibrium {
  enum class Kind { none, finite, infinity };
  Kind kind = Kind::none;
  double r_eq = std::numeric_limits<double>::quiet_NaN();
  double u_eq = 0.0;
};

Equilibrium equilibrium_point(const RadialPotential& p);

// U_eff(r) = L^2/(2 r^2) + U(r) - U_eq
struct EffectivePotentialSpec {
  RadialPotential potential;
  double L = 0.0;
  double u_eq = 0.0;

  double u_eff(double r) const {
    return 0.5 * L * L / (r * r) + potential.value(r) - u_eq;
  }
  double u_eff_prime(double r) const {
    return -L * L / (r * r * r) + potential.derivative(r);
  }
};

// Resolves U_eq from the equilibrium point (0 at infinity). Throws if the
// potential has no equilibrium; pass u_eq explicitly in that case.
EffectivePotentialSpec make_effective_spec(const RadialPotential& p, double L);
EffectivePotentialSpec make_effective_spec(const RadialPotential& p, double L,
                                           double u_eq);

enum class TrajectoryClass {
  radial,
  circular,
  bounded_noncircular,
  unbounded_one_turning,
  unbounded_no_turning,
  no_bounded_trajectories,  // perturbed with kappa >= L^2
  forbidden,                // E below the effective minimum
};

struct Classification {
  TrajectoryClass kind;
  std::optional<double> E_min;
  int turning_count = 0;
};

Classification classify_trajectory(const EffectivePotentialSpec& spec, double E);

std::string to_string(TrajectoryClass c);

}  // namespace cfdyn
