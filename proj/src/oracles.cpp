#include "cfdyn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cfdyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double potential_value(const OracleParams& p, double r) {
  return -p.k / r - 0.5 * p.kappa / (r * r);
}

void check_onshell(const PolarState& s, const OracleParams& p) {
  const double L = s.omega * s.r * s.r;
  const double E = 0.5 * s.v * s.v + 0.5 * L * L / (s.r * s.r) +
                   potential_value(p, s.r);
  const double tolL = 1e-10 * std::max(1.0, std::abs(p.L));
  const double tolE = 1e-10 * std::max(1.0, std::abs(p.E));
  if (std::abs(L - p.L) > tolL || std::abs(E - p.E) > tolE) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "off-shell state: residual dL=%.3e dE=%.3e", L - p.L,
                  E - p.E);
    throw std::invalid_argument(buf);
  }
}

void check_params(const OracleParams& p) {
  if (p.kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
  if (p.kappa > 0.0 && p.kappa >= p.L * p.L)
    throw std::invalid_argument("perturbed oracle requires 0 < kappa < L^2");
  if (p.E <= p.E_min())
    throw std::invalid_argument("closed forms exist only for E > E_min");
}

// effective sgn(v): apsis states take the sign of the side the motion
// enters next (+ leaving periapsis, - leaving apoapsis)
double branch_sgn(const PolarState& s, const OracleParams& p) {
  if (s.v != 0.0) return sgn(s.v);
  SpecialPoints sp = special_points(p);
  if (!sp.turning.empty() &&
      std::abs(s.r - sp.turning.front()) < std::abs(s.r - sp.turning.back()))
    return +1.0;
  return -1.0;
}

// asin(x) evaluated through the complementary angle when |x| ~ 1; the
// complement w = sqrt(1-x^2) comes from the state's radial speed, which
// is exact where x itself suffers cancellation (apsides)
double stable_asin(double x, double w) {
  x = std::clamp(x, -1.0, 1.0);
  if (std::abs(x) < 0.7) return std::asin(x);
  const double sign = x >= 0.0 ? 1.0 : -1.0;
  return sign * (0.5 * kPi - std::asin(std::clamp(w, 0.0, 1.0)));
}

double theta_closed(const PolarState& s, const OracleParams& p) {
  check_params(p);
  check_onshell(s, p);
  if (p.L == 0.0) return s.theta;
  if (p.branch == RefKind::turning_max && p.E >= 0.0)
    throw std::invalid_argument("no outer turning point for E >= 0");
  const double lam2 = p.lambda2();
  const double lam = std::sqrt(lam2);
  const double disc = std::sqrt(p.k * p.k + 2.0 * p.E * lam2);
  const double S = (lam2 - p.k * s.r) / (s.r * disc);
  const double Sw = lam * std::abs(s.v) / disc;
  double S0;
  switch (p.branch) {
    case RefKind::turning_min: S0 = 0.5 * kPi; break;
    case RefKind::turning_max: S0 = -0.5 * kPi; break;
    default: S0 = 0.0; break;
  }
  return s.theta +
         (p.L / lam) * branch_sgn(s, p) * (stable_asin(S, Sw) - S0);
}

// antiderivative of rho / sqrt(2E rho^2 + 2k rho - lam^2) per regime,
// evaluated at the state: sqrt(Q) = rho |v| uses the state's own speed
double time_primitive(double rho, double vabs, const OracleParams& p) {
  const double lam2 = p.lambda2();
  const double sq = rho * vabs;
  const double disc = std::sqrt(p.k * p.k + 2.0 * p.E * lam2);
  switch (p.regime()) {
    case EnergyRegime::neg_E: {
      const double ae = -p.E;
      const double chi = (2.0 * ae * rho - p.k) / disc;
      const double chi_w = std::sqrt(2.0 * ae) * sq / disc;
      return -sq / (2.0 * ae) +
             p.k / std::pow(2.0 * ae, 1.5) * stable_asin(chi, chi_w);
    }
    case EnergyRegime::zero_E:
      return sq * (p.k * rho + lam2) / (3.0 * p.k * p.k);
    case EnergyRegime::pos_E: {
      const double te = 2.0 * p.E;
      return sq / te - p.k / std::pow(te, 1.5) *
                           std::log(te * rho + p.k + std::sqrt(te) * sq);
    }
  }
  return 0.0;
}

// exact antiderivative values at the reference points (the generic
// evaluation degrades right where sqrt(Q) vanishes)
double time_primitive_at_reference(const OracleParams& p) {
  const double lam2 = p.lambda2();
  const double lam = std::sqrt(lam2);
  const double disc = std::sqrt(p.k * p.k + 2.0 * p.E * lam2);
  switch (p.regime()) {
    case EnergyRegime::neg_E: {
      const double ae = -p.E;
      const double gam = std::pow(2.0 * ae, 1.5);
      switch (p.branch) {
        case RefKind::turning_min: return -p.k / gam * (0.5 * kPi);
        case RefKind::turning_max: return p.k / gam * (0.5 * kPi);
        default:
          return -lam * disc / (2.0 * ae * p.k) -
                 p.k / gam * std::asin(std::min(disc / p.k, 1.0));
      }
    }
    case EnergyRegime::zero_E:
      return p.branch == RefKind::inertial
                 ? 2.0 * lam * lam2 / (3.0 * p.k * p.k)
                 : 0.0;
    case EnergyRegime::pos_E: {
      const double te = 2.0 * p.E;
      const double c = p.k / std::pow(te, 1.5);
      if (p.branch == RefKind::inertial)
        return lam * disc / (te * p.k) -
               c * std::log(disc * (disc + std::sqrt(te) * lam) / p.k);
      return -c * std::log(disc);
    }
  }
  return 0.0;
}

double time_closed(const PolarState& s, const OracleParams& p) {
  check_params(p);
  check_onshell(s, p);
  if ((p.branch == RefKind::turning_max) && p.E >= 0.0)
    throw std::invalid_argument("no outer turning point for E >= 0");
  return s.t - branch_sgn(s, p) * (time_primitive(s.r, std::abs(s.v), p) -
                                   time_primitive_at_reference(p));
}

double shape_closed(double theta, const OracleParams& p, double Theta) {
  check_params(p);
  const double lam2 = p.lambda2();
  const double lam = std::sqrt(lam2);
  const double disc = std::sqrt(p.k * p.k + 2.0 * p.E * lam2);
  const double arg = (lam / p.L) * (Theta - theta);
  double denom;
  switch (p.branch) {
    case RefKind::turning_min:
      denom = p.k + disc * std::cos(arg);
      break;
    case RefKind::turning_max:
      denom = p.k - disc * std::cos(arg);
      break;
    default:
      denom = p.k + p.sgn_v * disc * std::sin(arg);
      break;
  }
  if (denom <= 0.0)
    throw std::domain_error("theta outside the branch's angular domain");
  return lam2 / denom;
}

}  // namespace

SpecialPoints special_points(const OracleParams& p) {
  check_params(p);
  SpecialPoints sp;
  const double lam2 = p.lambda2();
  sp.E_min = p.E_min();
  switch (p.regime()) {
    case EnergyRegime::neg_E: {
      const double ae = -p.E;
      const double d = std::sqrt(p.k * p.k - 2.0 * ae * lam2);
      sp.turning = {(p.k - d) / (2.0 * ae), (p.k + d) / (2.0 * ae)};
      break;
    }
    case EnergyRegime::zero_E:
      sp.turning = {lam2 / (2.0 * p.k)};
      break;
    case EnergyRegime::pos_E:
      sp.turning = {(std::sqrt(p.k * p.k + 2.0 * p.E * lam2) - p.k) /
                    (2.0 * p.E)};
      break;
  }
  if (p.k > 0.0) {
    sp.inertial = lam2 / p.k;
    // |v| at r^*: sqrt(2 E lam^2 + k^2) / lam
    sp.v_star = std::sqrt(2.0 * p.E * lam2 + p.k * p.k) / std::sqrt(lam2);
  }
  return sp;
}

double kepler_theta_closed(const PolarState& s, const OracleParams& p) {
  if (p.kappa != 0.0)
    throw std::invalid_argument("kepler oracle requires kappa = 0");
  return theta_closed(s, p);
}

double newton_theta_closed(const PolarState& s, const OracleParams& p) {
  if (p.kappa <= 0.0)
    throw std::invalid_argument("newton oracle requires kappa > 0");
  return theta_closed(s, p);
}

double kepler_time_closed(const PolarState& s, const OracleParams& p) {
  if (p.kappa != 0.0)
    throw std::invalid_argument("kepler oracle requires kappa = 0");
  return time_closed(s, p);
}

double newton_time_closed(const PolarState& s, const OracleParams& p) {
  if (p.kappa <= 0.0)
    throw std::invalid_argument("newton oracle requires kappa > 0");
  return time_closed(s, p);
}

double kepler_shape(double theta, const OracleParams& p, double Theta) {
  if (p.kappa != 0.0)
    throw std::invalid_argument("kepler oracle requires kappa = 0");
  return shape_closed(theta, p, Theta);
}

double newton_shape(double theta, const OracleParams& p, double Theta) {
  if (p.kappa <= 0.0)
    throw std::invalid_argument("newton oracle requires kappa > 0");
  return shape_closed(theta, p, Theta);
}

double closed_apsidal_angle(const OracleParams& p) {
  return 2.0 * kPi * p.L / std::sqrt(p.lambda2());
}

double closed_radial_period(const OracleParams& p) {
  if (p.E >= 0.0)
    throw std::invalid_argument("radial period defined for E < 0 only");
  return kPi * p.k / std::sqrt(2.0 * std::pow(std::abs(p.E), 3.0));
}

}  // namespace cfdyn
