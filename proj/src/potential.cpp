#include "cfdyn/potential.hpp"

#include <cmath>

#include "cfdyn/quadrature.hpp"

namespace cfdyn {

RadialPotential RadialPotential::kepler(double k) {
  RadialPotential p;
  p.kind_ = PotentialKind::kepler;
  p.k_ = k;
  return p;
}

RadialPotential RadialPotential::perturbed(double k, double kappa) {
  if (kappa <= 0.0)
    throw std::invalid_argument("perturbed potential requires kappa > 0");
  RadialPotential p;
  p.kind_ = PotentialKind::perturbed;
  p.k_ = k;
  p.kappa_ = kappa;
  return p;
}

RadialPotential RadialPotential::power_law(double k, double p) {
  if (p == -1.0)
    throw std::invalid_argument("power potential requires p != -1");
  RadialPotential pot;
  pot.kind_ = PotentialKind::power;
  pot.k_ = k;
  pot.p_ = p;
  return pot;
}

RadialPotential RadialPotential::custom(CustomSpec spec) {
  if (!spec.value || !spec.derivative)
    throw std::invalid_argument("custom potential requires U and U' callbacks");
  RadialPotential p;
  p.kind_ = PotentialKind::custom;
  p.domain_lo_ = spec.domain_lo;
  p.domain_hi_ = spec.domain_hi;
  p.bracket_lo_ = spec.bracket_lo;
  p.bracket_hi_ = spec.bracket_hi;
  p.custom_ = std::make_shared<const CustomSpec>(std::move(spec));
  return p;
}

void RadialPotential::check_domain(double r) const {
  if (!(r > domain_lo_) || !(r < domain_hi_))
    throw std::domain_error("radius outside potential domain");
}

double RadialPotential::value(double r) const {
  check_domain(r);
  switch (kind_) {
    case PotentialKind::kepler:
      return -k_ / r;
    case PotentialKind::perturbed:
      return -k_ / r - 0.5 * kappa_ / (r * r);
    case PotentialKind::power:
      return k_ * std::pow(r, p_ + 1.0) / (p_ + 1.0);
    case PotentialKind::custom:
      return custom_->value(r);
  }
  return 0.0;
}

double RadialPotential::derivative(double r) const {
  check_domain(r);
  switch (kind_) {
    case PotentialKind::kepler:
      return k_ / (r * r);
    case PotentialKind::perturbed:
      return k_ / (r * r) + kappa_ / (r * r * r);
    case PotentialKind::power:
      return k_ * std::pow(r, p_);
    case PotentialKind::custom:
      return custom_->derivative(r);
  }
  return 0.0;
}

double RadialPotential::second_derivative(double r) const {
  check_domain(r);
  switch (kind_) {
    case PotentialKind::kepler:
      return -2.0 * k_ / (r * r * r);
    case PotentialKind::perturbed:
      return -2.0 * k_ / (r * r * r) - 3.0 * kappa_ / (r * r * r * r);
    case PotentialKind::power:
      return k_ * p_ * std::pow(r, p_ - 1.0);
    case PotentialKind::custom: {
      if (custom_->second_derivative) return custom_->second_derivative(r);
      const double h = 1e-5 * std::max(1.0, std::abs(r));
      return (custom_->derivative(r + h) - custom_->derivative(r - h)) /
             (2.0 * h);
    }
  }
  return 0.0;
}

std::pair<double, double> RadialPotential::eval(double r) const {
  return {value(r), derivative(r)};
}

Equilibrium equilibrium_point(const RadialPotential& p) {
  Equilibrium eq;
  switch (p.kind()) {
    case PotentialKind::kepler:
    case PotentialKind::perturbed:
      // U' ~ k/r^2 never vanishes at finite r; U -> 0 at infinity
      eq.kind = Equilibrium::Kind::infinity;
      eq.r_eq = std::numeric_limits<double>::infinity();
      eq.u_eq = 0.0;
      return eq;
    case PotentialKind::power:
      if (p.exponent() > 0.0) {
        eq.kind = Equilibrium::Kind::finite;
        eq.r_eq = 0.0;
        eq.u_eq = 0.0;  // U(0) = 0 for p > -1
      } else if (p.exponent() < -1.0) {
        eq.kind = Equilibrium::Kind::infinity;
        eq.r_eq = std::numeric_limits<double>::infinity();
        eq.u_eq = 0.0;
      }
      return eq;
    case PotentialKind::custom: {
      // bracketed scan for a sign change of U'
      const int n = 256;
      const double lo = p.bracket_lo(), hi = p.bracket_hi();
      double prev_r = lo, prev_f = p.derivative(lo);
      for (int i = 1; i <= n; ++i) {
        double r = lo * std::pow(hi / lo, double(i) / n);
        double f = p.derivative(r);
        if (prev_f == 0.0) {
          eq.kind = Equilibrium::Kind::finite;
          eq.r_eq = prev_r;
          eq.u_eq = p.value(prev_r);
          return eq;
        }
        if (prev_f * f < 0.0) {
          double root = refine_root([&](double x) { return p.derivative(x); },
                                    prev_r, r);
          eq.kind = Equilibrium::Kind::finite;
          eq.r_eq = root;
          eq.u_eq = p.value(root);
          return eq;
        }
        prev_r = r;
        prev_f = f;
      }
      return eq;  // none found: explicit "no equilibrium"
    }
  }
  return eq;
}

EffectivePotentialSpec make_effective_spec(const RadialPotential& p, double L) {
  Equilibrium eq = equilibrium_point(p);
  if (eq.kind == Equilibrium::Kind::none)
    throw std::invalid_argument(
        "potential has no equilibrium point; supply u_eq explicitly");
  return {p, L, eq.u_eq};
}

EffectivePotentialSpec make_effective_spec(const RadialPotential& p, double L,
                                           double u_eq) {
  return {p, L, u_eq};
}

Classification classify_trajectory(const EffectivePotentialSpec& spec, double E) {
  if (!std::isfinite(E) || !std::isfinite(spec.L))
    throw std::invalid_argument("classify_trajectory requires finite L, E");

  Classification c{TrajectoryClass::radial, std::nullopt, 0};
  if (spec.L == 0.0) return c;

  if (spec.potential.kind() == PotentialKind::perturbed &&
      spec.potential.kappa() >= spec.L * spec.L) {
    c.kind = TrajectoryClass::no_bounded_trajectories;
    return c;
  }

  Radicand rad{spec, E};
  // E_min from the effective-potential minimum over inertial points
  auto ips = find_inertial_points(rad);
  if (!ips.empty()) {
    double emin = std::numeric_limits<double>::infinity();
    for (const auto& ip : ips) {
      // keep only local minima of U_eff
      double h = 1e-5 * std::max(1.0, ip.r);
      double u0 = spec.u_eff(ip.r);
      if (spec.u_eff(ip.r - h) > u0 && spec.u_eff(ip.r + h) > u0)
        emin = std::min(emin, u0);
    }
    if (std::isfinite(emin)) c.E_min = emin;
  }

  auto roots = find_turning_points(rad);
  c.turning_count = 0;
  for (const auto& rt : roots) c.turning_count += rt.multiplicity;

  if (c.E_min) {
    double scale = 1.0 + std::abs(*c.E_min);
    if (E < *c.E_min - 1e-12 * scale) {
      c.kind = TrajectoryClass::forbidden;
      return c;
    }
    if (std::abs(E - *c.E_min) <= 1e-12 * scale ||
        (!roots.empty() && roots.front().multiplicity == 2)) {
      c.kind = TrajectoryClass::circular;
      return c;
    }
  }

  int simple = int(roots.size());
  if (simple >= 2) {
    // bounded iff W < 0 beyond the outermost root
    double r_out = roots.back().r * 1.5;
    if (r_out >= spec.potential.domain_hi())
      r_out = 0.5 * (roots.back().r + spec.potential.domain_hi());
    if (rad(r_out) < 0.0) {
      c.kind = TrajectoryClass::bounded_noncircular;
      return c;
    }
  }
  c.kind = (simple >= 1) ? TrajectoryClass::unbounded_one_turning
                         : TrajectoryClass::unbounded_no_turning;
  return c;
}

std::string to_string(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::radial: return "radial";
    case TrajectoryClass::circular: return "circular";
    case TrajectoryClass::bounded_noncircular: return "bounded_noncircular";
    case TrajectoryClass::unbounded_one_turning: return "unbounded_one_turning";
    case TrajectoryClass::unbounded_no_turning: return "unbounded_no_turning";
    case TrajectoryClass::no_bounded_trajectories: return "no_bounded_trajectories";
    case TrajectoryClass::forbidden: return "forbidden";
  }
  return "?";
}

}  // namespace cfdyn
