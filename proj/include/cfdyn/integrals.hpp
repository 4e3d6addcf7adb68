#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfdyn/dynamics.hpp"
#include "cfdyn/potential.hpp"
#include "cfdyn/quadrature.hpp"
#include "cfdyn/state.hpp"

namespace cfdyn {

enum class RefKind { turning_min, turning_max, inertial };

// radial endpoint r0 that fixes the zero point of Theta and T
struct ReferencePoint {
  RefKind kind = RefKind::turning_min;
  double r0 = 0.0;
  int root_index = 0;  // which root of the quadrature scan
};

struct FirstIntegralSet {
  double L = 0.0;
  double E = 0.0;
  // absent on circular solutions ("undefined for circular")
  std::optional<double> Theta;
  std::optional<double> T;
  std::optional<ReferencePoint> ref;
  int sgn_v = 0;
  std::string branch_note;
};

double angular_momentum(const PolarState& s);
double energy(const PolarState& s, const EffectivePotentialSpec& spec);

// State at radius r on the (L, E) shell: v = sgn_v sqrt(W(r)), omega =
// L/r^2. Throws when W(r) < 0.
PolarState state_on_shell(const EffectivePotentialSpec& spec, double E,
                          double r, int sgn_v, double t = 0.0,
                          double theta = 0.0);

// Resolves the requested reference point for the (L, E) of the given
// state. Returns nullopt when no such point exists (e.g. turning point
// requested on an unbounded no-turning trajectory).
std::optional<ReferencePoint> resolve_reference(const PolarState& s,
                                                const RadialPotential& p,
                                                RefKind kind,
                                                double u_eq);

// Theta = theta - L * int_{r0}^{r} sgn(v) / sqrt(2(E+U_eq-U)rho^4 - L^2 rho^2) drho.
// L and E are recomputed from the state. Throws on circular states and
// when r lies outside the branch's radial domain.
double theta_integral(const PolarState& s, const EffectivePotentialSpec& spec,
                      const ReferencePoint& ref, double tol = 1e-10);

// T = t - int_{r0}^{r} sgn(v) / sqrt(W) drho
double time_integral(const PolarState& s, const EffectivePotentialSpec& spec,
                     const ReferencePoint& ref, double tol = 1e-10);

// Both integrals plus branch bookkeeping; Theta/T absent for circular or
// radial-degenerate inputs instead of silently returning numbers.
FirstIntegralSet first_integrals(const PolarState& s,
                                 const EffectivePotentialSpec& spec,
                                 RefKind kind, double tol = 1e-10);

struct ApsidalAngle {
  double value = 0.0;       // raw, not wrapped
  double mod_2pi = 0.0;
  bool closed = false;      // rational multiple of 2pi within tolerance
  long p = 0, q = 0;        // delta_theta/(2 pi) ~ p/q when closed
};

// angular separation between successive periapsis (or apoapsis) points
ApsidalAngle apsidal_angle(const EffectivePotentialSpec& spec, double E,
                           double tol = 1e-10);

// time between successive periapsis (or apoapsis) points
double radial_period(const EffectivePotentialSpec& spec, double E,
                     double tol = 1e-10);

struct CurveSample {
  double r = 0.0;
  double theta = 0.0;
  bool ok = false;
};

// theta(r) along one sgn(v) branch of the trajectory shape
std::vector<CurveSample> shape_curve(const EffectivePotentialSpec& spec,
                                     double E, double Theta,
                                     const ReferencePoint& ref,
                                     const std::vector<double>& r_samples,
                                     int sgn_v, double tol = 1e-10);

// rational-multiple test for delta_theta/(2 pi); q <= 64, tol 1e-9
bool rational_multiple(double x, long max_q, double tol, long* p_out,
                       long* q_out);

struct ConservationReport {
  double max_drift = 0.0;          // max within-arc (or whole-span) drift
  std::vector<double> arc_drifts;  // one per arc between apsis events
  std::vector<double> jumps;       // measured change across each apsis
  std::vector<Event::Kind> jump_kinds;  // which apsis each jump crosses
};

// Drift of a first-integral evaluator along an integrated trajectory.
// piecewise=false: one span, max |I(t) - I(t0)| (for L, E).
// piecewise=true: drift within each apsis-to-apsis arc plus the jump
// across each apsis (for Theta, T).
ConservationReport conservation_residual(
    const std::function<double(const PolarState&)>& evaluator,
    const Trajectory& traj, bool piecewise = false, int samples_per_arc = 16);

}  // namespace cfdyn
