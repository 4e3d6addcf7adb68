#pragma once

#include <optional>
#include <vector>

#include "cfdyn/integrals.hpp"
#include "cfdyn/potential.hpp"
#include "cfdyn/state.hpp"

namespace cfdyn {

// Closed-form reference values for the inverse-square force and its
// cubically perturbed variant. Everything reduces to the replacement
// L^2 -> L^2 - kappa with an L/sqrt(L^2-kappa) angular prefactor.
enum class EnergyRegime { neg_E, zero_E, pos_E };

struct OracleParams {
  double k = 1.0;
  double kappa = 0.0;  // 0 selects the pure inverse-square force
  double L = 1.0;
  double E = -0.25;
  RefKind branch = RefKind::turning_min;
  int sgn_v = +1;  // selects the trajectory piece for inertial branches

  EnergyRegime regime() const {
    if (E < 0.0) return EnergyRegime::neg_E;
    return E > 0.0 ? EnergyRegime::pos_E : EnergyRegime::zero_E;
  }
  double lambda2() const { return L * L - kappa; }  // effective L^2
  double E_min() const { return -0.5 * k * k / lambda2(); }
};

struct SpecialPoints {
  std::vector<double> turning;        // 0, 1, or 2 radii, ascending
  std::optional<double> inertial;     // r^* = (L^2 - kappa)/k when k > 0
  double E_min = 0.0;
  std::optional<double> v_star;       // |v| at the inertial point
};

SpecialPoints special_points(const OracleParams& p);

// Theta evaluated from the closed-form arcsin expression with the branch
// offsets (+-pi/2 at turning points, 0 at the inertial point). The state
// must be on-shell: its own L and E must match the params to 1e-10.
double kepler_theta_closed(const PolarState& s, const OracleParams& p);
double newton_theta_closed(const PolarState& s, const OracleParams& p);

// T from the regime-wise antiderivative of rho/sqrt(2E rho^2+2k rho-Lam^2).
double kepler_time_closed(const PolarState& s, const OracleParams& p);
double newton_time_closed(const PolarState& s, const OracleParams& p);

// Conic-like shape r(theta): cosine form on turning branches, sine form
// on inertial branches. Throws outside the branch's angular domain.
double kepler_shape(double theta, const OracleParams& p, double Theta);
double newton_shape(double theta, const OracleParams& p, double Theta);

// closed-form apsidal separations for the bounded regime
double closed_apsidal_angle(const OracleParams& p);  // 2 pi L / sqrt(L^2-kappa)
double closed_radial_period(const OracleParams& p);  // pi k / sqrt(2 |E|^3)

}  // namespace cfdyn
