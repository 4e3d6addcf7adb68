#pragma once

#include <array>
#include <functional>
#include <vector>

#include "cfdyn/integrals.hpp"
#include "cfdyn/potential.hpp"
#include "cfdyn/state.hpp"

namespace cfdyn {

// The four extended symmetry generators acting as point transformations
// on (t, r, theta, L, E); eta_r is identically zero.
enum class Generator { X_L, X_E, X_Theta, X_T };

struct ExtPoint {
  double t = 0.0;
  double r = 1.0;
  double theta = 0.0;
  double L = 1.0;
  double E = -0.25;
  int sgn_v = +1;  // branch of the quadratures
};

struct GeneratorComponents {
  double eta_t = 0.0;
  double eta_r = 0.0;
  double eta_theta = 0.0;
  double eta_L = 0.0;
  double eta_E = 0.0;
};

// X_L = -d_theta, X_E = d_t (exact); X_Theta = (Theta_E, 0, -Theta_L, 1, 0)
// and X_T = (T_E, 0, -T_L, 0, -1) with the partials taken by Richardson
// finite differences of the quadratures, recomputing r0(L, E) at every
// perturbed evaluation. Throws "too close to apsis" when the FD stencil
// would cross a turning point.
GeneratorComponents generator_components(Generator g, const ExtPoint& pt,
                                         const RadialPotential& p, RefKind ref,
                                         double fd_step = 1e-6);

// Finite group transformation with parameter eps. The theta/t components
// follow the exact flow of the extended generator (integrated in the
// group parameter); r is invariant under all four.
ExtPoint apply_group(Generator g, double eps, const ExtPoint& pt,
                     const RadialPotential& p, RefKind ref);

// Directional derivatives of (L, E, Theta, T) along the group flow at
// eps = 0; reproduces the signed permutation table
//   X_L -> (0, 0, -1, 0), X_E -> (0, 0, 0, 1),
//   X_Theta -> (1, 0, 0, 0), X_T -> (0, -1, 0, 0).
std::array<double, 4> action_on_integrals(Generator g, const PolarState& s,
                                          const RadialPotential& p, RefKind ref,
                                          double fd_step = 1e-6);

// Norm of the finite-difference Lie bracket of two extended generators at
// the point (second-difference stencils with Richardson extrapolation).
double commutator_residual(Generator g1, Generator g2, const ExtPoint& pt,
                           const RadialPotential& p, RefKind ref,
                           double fd_step = 1e-4);

// Diagnostic for the pointwise relation Theta_E = -L Theta_L / (2(E-U(r))),
// a tempting shortcut for the Theta group transformation; it holds only
// where W(r) = 0, so the flow integration above never relies on it.
double theta_group_relation_residual(const ExtPoint& pt,
                                     const RadialPotential& p, RefKind ref,
                                     double fd_step = 1e-6);

// multiplier (Q^r, Q^theta) = (-I_v, -r^-2 I_omega) by centered FD
std::pair<double, double> noether_multiplier(
    const std::function<double(const PolarState&)>& integral,
    const PolarState& s, double fd_step = 1e-6);

// jet point with free accelerations (not constrained to solutions)
struct JetPoint {
  PolarState s;
  double a_r = 0.0;
  double a_theta = 0.0;
};

// |dI/dt + (dL/dr) I_v + (dL/dtheta) r^-2 I_omega| at an arbitrary jet
// point; vanishes identically for first integrals.
double noether_identity_residual(
    const std::function<double(const PolarState&)>& integral, const JetPoint& jp,
    const RadialPotential& p, double fd_step = 1e-6);

// scalar field on (t, r, theta) with analytic partials up to second order
struct ScalarField {
  using Fn = std::function<double(double, double, double)>;
  Fn f = nullptr;
  Fn f_t = nullptr, f_r = nullptr, f_th = nullptr;
  Fn f_tt = nullptr, f_tr = nullptr, f_tth = nullptr;
  Fn f_rr = nullptr, f_rth = nullptr, f_thth = nullptr;

  double operator()(double t, double r, double th) const {
    return f ? f(t, r, th) : 0.0;
  }
};

// infinitesimal point transformation tau d_t + xi d_r + psi d_theta
struct PointSymmetry {
  ScalarField tau, xi, psi;
};

// the point symmetries admitted for special force laws
PointSymmetry rotation_generator();                  // d_theta
PointSymmetry time_translation_generator();          // d_t
PointSymmetry scaling_generator(double p);           // t d_t + 2/(1-p) r d_r
PointSymmetry dilation_generator(double k);          // exp(2 sqrt(k) t)(d_t + sqrt(k) r d_r)

// Max residual of the two point-symmetry determining equations over the
// sample states, with accelerations eliminated through the equations of
// motion.
double point_symmetry_residual(const PointSymmetry& gen,
                               const std::vector<PolarState>& samples,
                               const RadialPotential& p);

// One recovered generator table from the restricted determining system,
// sampled on a radial grid.
struct RecoveredGenerator {
  std::vector<double> r;
  std::vector<GeneratorComponents> components;
};

struct SpecialSymmetrySolution {
  RecoveredGenerator x_theta;  // basis (eta_L, eta_E) = (1, 0)
  RecoveredGenerator x_t;      // basis (0, -1)
  GeneratorComponents x_l;     // constant solution eta_theta = -1
  GeneratorComponents x_e;     // constant solution eta_t = 1
};

// Integrates d(eta_t)/dr and d(eta_theta)/dr of the restricted determining
// system across the grid for each basis choice; the additive freedom is
// fixed by semi-analytic anchor values at the inertial point.
SpecialSymmetrySolution solve_special_symmetries(const RadialPotential& p,
                                                 double L, double E,
                                                 const std::vector<double>& r_grid,
                                                 int sgn_v = +1);

}  // namespace cfdyn
