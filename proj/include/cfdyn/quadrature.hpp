#pragma once

#include <functional>
#include <vector>

#include "cfdyn/potential.hpp"

namespace cfdyn {

// W(r) = 2(E + U_eq - U(r)) - L^2/r^2; equals v^2 on solutions and
// vanishes at turning points.
struct Radicand {
  EffectivePotentialSpec spec;
  double E = 0.0;

  double operator()(double r) const {
    return 2.0 * (E - spec.u_eff(r));
  }
  // characteristic magnitude of the terms composing W near r, used to
  // scale residual tolerances
  double scale(double r) const {
    return 1.0 + 2.0 * std::abs(E) + 2.0 * std::abs(spec.potential.value(r)) +
           spec.L * spec.L / (r * r);
  }
};

struct ScanConfig {
  // 0 means auto: geometric grid over [1e-6, 1e6] * r_ref with r_ref the
  // inertial point when one exists, else 1
  double r_lo = 0.0;
  double r_hi = 0.0;
  int nodes = 256;
};

struct Root {
  double r;
  int multiplicity;  // 2 flags the circular-degenerate double root
};

// Sorted roots of W(r) = 0 in the scan bracket. Empty list is a valid
// outcome (unbounded trajectory with no turning point in range).
std::vector<Root> find_turning_points(const Radicand& rad, ScanConfig scan = {});

// Sorted roots of the effective-force equation L^2 r^-3 - U'(r) = 0.
std::vector<Root> find_inertial_points(const Radicand& rad, ScanConfig scan = {});

enum class IntegrandKind { angular, temporal };

struct SingularIntegralSpec {
  Radicand rad;
  IntegrandKind kind = IntegrandKind::temporal;
  double a = 0.0, b = 0.0;
  bool singular_a = false, singular_b = false;
  double tol = 1e-10;
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

// Integrates L/(r^2 sqrt(W)) or 1/sqrt(W) over [a, b]. Flagged singular
// ends must be simple zeros of W; they are removed by the substitution
// r = r_end -+ s^2 before adaptive Gauss-Kronrod refinement.
QuadResult integrate_singular(const SingularIntegralSpec& spec);

// Generic kernel behind integrate_singular: f may blow up like
// 1/sqrt(r - end) at a flagged end.
QuadResult integrate_sqrt_endpoints(const std::function<double(double)>& f,
                                    double a, double b, bool singular_a,
                                    bool singular_b, double tol,
                                    int max_depth = 40);

// Bracketed root refinement (Brent), used by the scanners and exposed for
// reuse; f(lo) and f(hi) must have opposite signs.
double refine_root(const std::function<double(double)>& f, double lo, double hi);

}  // namespace cfdyn
