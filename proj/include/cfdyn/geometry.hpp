#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cfdyn/dynamics.hpp"
#include "cfdyn/integrals.hpp"
#include "cfdyn/potential.hpp"
#include "cfdyn/state.hpp"

namespace cfdyn {

// L = r ^ v: antisymmetric rank-2 tensor in the oriented plane of motion.
// Components are L_ij = scalar * (e1_i e2_j - e1_j e2_i); the scalar sign
// follows omega's sign in the (e1, e2) frame.
struct Bivector {
  PlaneFrame frame;
  double scalar = 0.0;  // signed magnitude; |L|^2 = 2 scalar^2

  int dim() const { return frame.dim(); }
  double component(int i, int j) const;
  double norm() const;  // sqrt(sum L_ij^2) = sqrt(2)|scalar|
  // contraction (u . L)_j = sum_i u_i L_ij
  std::vector<double> contract(const std::vector<double>& u) const;
  // full contraction L . M = sum_ij L_ij M_ij
  double dot(const Bivector& other) const;
  // max |(u ^ L)_ijk| over independent 3-index alternations
  double wedge_norm(const std::vector<double>& u) const;
  // max |(L ^ L)_ijkl| over independent 4-index alternations
  double self_wedge_norm() const;
};

Bivector bivector_from_state(const CartesianState& s);

struct DirectionResult {
  std::vector<double> theta_hat;
  std::vector<double> theta_hat_perp;
  std::vector<double> A;      // lrl vector = normalization * theta_hat
  double normalization = 1.0;
  ReferencePoint ref;
  int sgn_v = 0;
};

// Unit vector pointing along the radial line through the reference point
// (the directional part of the generalized LRL vector). Throws on
// circular states; L = 0 degenerates to the radial line direction.
DirectionResult theta_hat(const CartesianState& s, const RadialPotential& p,
                          RefKind ref, double tol = 1e-12);

// theta_hat rotated by +pi/2 in the oriented plane: contraction with the
// unit bivector.
std::vector<double> theta_hat_perp(const std::vector<double>& theta_hat_vec,
                                   const Bivector& b);

// Generalized LRL vector A = A(E, L) * theta_hat, assembled through the
// radial-derivative form away from apsides. Default normalization:
// sqrt(2 E L^2 + k^2) for kepler, sqrt(2 E (L^2 - kappa) + k^2) for the
// perturbed force, 1 otherwise.
DirectionResult lrl_vector(const CartesianState& s, const RadialPotential& p,
                           RefKind ref,
                           std::optional<double> normalization = std::nullopt,
                           double tol = 1e-12);

// Variant built on the inertial reference point (generalizes Hamilton's
// eccentricity vector; flips sign across periapsis). Nullopt when the
// potential has no inertial point at the state's (L, E).
std::optional<DirectionResult> lrl_variant(
    const CartesianState& s, const RadialPotential& p,
    std::optional<double> normalization = std::nullopt, double tol = 1e-12);

// T in n-dimensional form; equals the polar time_integral after
// reduce_to_plane.
double temporal_ndim(const CartesianState& s, const RadialPotential& p,
                     RefKind ref, double tol = 1e-12);

struct IndependenceReport {
  int n = 0;
  int bivector_components = 0;   // n (n-1) / 2
  int bivector_independent = 0;  // 2n - 3
  int theta_hat_independent = 0; // n - 1
  int joint_geometric = 0;       // 2n - 2 (bivector + theta_hat together)
  int scalar_count = 2;          // E and T
  int total_independent = 0;     // 2n
  int jacobian_rank = 0;         // numerical rank of the component map
};

// Structural counts plus the numerical rank of d(L_ij, theta_hat, E, T) /
// d(r, v, t) at a random bounded Kepler-type state.
IndependenceReport count_independent(int n, const RadialPotential& p,
                                     std::uint64_t seed = 1234,
                                     double rank_threshold = 1e-8);

}  // namespace cfdyn
