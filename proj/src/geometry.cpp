#include "cfdyn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cfdyn {

namespace {

double vdot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

struct ReducedState {
  PlaneFrame frame;
  PolarState polar;        // theta = 0 gauge, omega >= 0
  double L = 0.0;          // scalar angular momentum in the motion frame
  double E = 0.0;
  double u_eq = 0.0;
};

ReducedState reduce(const CartesianState& s, const RadialPotential& p) {
  ReducedState rs;
  std::tie(rs.frame, rs.polar) = reduce_to_plane(s);
  rs.u_eq = equilibrium_point(p).u_eq;
  rs.L = rs.polar.omega * rs.polar.r * rs.polar.r;
  EffectivePotentialSpec spec{p, rs.L, rs.u_eq};
  rs.E = energy(rs.polar, spec);
  return rs;
}

// phi0 = |L| * |int_{r0}^{r} drho / (rho^2 sqrt W)| >= 0
double phi0_integral(const ReducedState& rs, const RadialPotential& p,
                     const ReferencePoint& ref, double tol) {
  EffectivePotentialSpec spec{p, std::abs(rs.L), rs.u_eq};
  // theta_integral returns theta - sgn(v) L int_{r0}^{r} g with theta = 0,
  // so the unsigned integral falls out directly
  PolarState probe = rs.polar;
  probe.theta = 0.0;
  return std::abs(theta_integral(probe, spec, ref, tol));
}

double default_normalization(const RadialPotential& p, double L, double E) {
  switch (p.kind()) {
    case PotentialKind::kepler:
      return std::sqrt(std::max(2.0 * E * L * L + p.k() * p.k(), 0.0));
    case PotentialKind::perturbed:
      return std::sqrt(
          std::max(2.0 * E * (L * L - p.kappa()) + p.k() * p.k(), 0.0));
    default:
      return 1.0;
  }
}

}  // namespace

double Bivector::component(int i, int j) const {
  return scalar * (frame.e1[i] * frame.e2[j] - frame.e1[j] * frame.e2[i]);
}

double Bivector::norm() const { return std::sqrt(2.0) * std::abs(scalar); }

std::vector<double> Bivector::contract(const std::vector<double>& u) const {
  // (u . L)_j = sum_i u_i L_ij = scalar * ((u.e1) e2_j - (u.e2) e1_j)
  const double ue1 = vdot(u, frame.e1), ue2 = vdot(u, frame.e2);
  std::vector<double> out(frame.dim());
  for (int j = 0; j < frame.dim(); ++j)
    out[j] = scalar * (ue1 * frame.e2[j] - ue2 * frame.e1[j]);
  return out;
}

double Bivector::dot(const Bivector& other) const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) s += component(i, j) * other.component(i, j);
  return s;
}

double Bivector::wedge_norm(const std::vector<double>& u) const {
  // (u ^ L)_ijk = u_i L_jk - u_j L_ik + u_k L_ij
  double worst = 0.0;
  const int n = dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double w = u[i] * component(j, k) - u[j] * component(i, k) +
                   u[k] * component(i, j);
        worst = std::max(worst, std::abs(w));
      }
  return worst;
}

double Bivector::self_wedge_norm() const {
  // (L ^ L)_ijkl = L_ij L_kl - L_ik L_jl + L_il L_jk (up to normalization)
  double worst = 0.0;
  const int n = dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          double w = component(i, j) * component(k, l) -
                     component(i, k) * component(j, l) +
                     component(i, l) * component(j, k);
          worst = std::max(worst, std::abs(w));
        }
  return worst;
}

Bivector bivector_from_state(const CartesianState& s) {
  auto [frame, polar] = reduce_to_plane(s);
  Bivector b;
  b.frame = frame;
  b.scalar = polar.omega * polar.r * polar.r;  // >= 0 in the motion frame
  return b;
}

DirectionResult theta_hat(const CartesianState& s, const RadialPotential& p,
                          RefKind ref, double tol) {
  ReducedState rs = reduce(s, p);
  const int n = s.dim();
  DirectionResult out;
  out.sgn_v = sign_of(rs.polar.v);

  if (rs.L == 0.0) {
    // radial motion: the radial line direction
    out.theta_hat.resize(n);
    for (int i = 0; i < n; ++i) out.theta_hat[i] = s.r[i] / rs.polar.r;
    out.theta_hat_perp.assign(n, 0.0);
    return out;
  }

  auto refpt = resolve_reference(rs.polar, p, ref, rs.u_eq);
  if (!refpt) throw std::domain_error("no reference point of requested kind");
  out.ref = *refpt;

  const double phi0 = phi0_integral(rs, p, *refpt, tol);
  Bivector b = bivector_from_state(s);
  const double r = rs.polar.r;
  const double vdotr = vdot(s.v, s.r);
  // the sqrt(2) sgn(v.r)/|L| sin(phi0) term holds literally for r >= r0;
  // the sign flips on the other side of the reference radius
  double side = (r >= refpt->r0) ? 1.0 : -1.0;
  double sgn_vr = vdotr != 0.0 ? double(sign_of(vdotr)) : 1.0;
  double coeff = -side * sgn_vr * std::sqrt(2.0) / b.norm() * std::sin(phi0);
  auto rdotL = b.contract(s.r);
  out.theta_hat.resize(n);
  for (int i = 0; i < n; ++i)
    out.theta_hat[i] = (std::cos(phi0) * s.r[i] + coeff * rdotL[i]) / r;
  out.theta_hat_perp = theta_hat_perp(out.theta_hat, b);
  return out;
}

std::vector<double> theta_hat_perp(const std::vector<double>& theta_hat_vec,
                                   const Bivector& b) {
  if (b.scalar == 0.0)
    throw std::domain_error("theta_hat_perp undefined for zero bivector");
  Bivector unit = b;
  unit.scalar = 1.0;  // Lhat = e1 ^ e2
  return unit.contract(theta_hat_vec);
}

DirectionResult lrl_vector(const CartesianState& s, const RadialPotential& p,
                           RefKind ref, std::optional<double> normalization,
                           double tol) {
  ReducedState rs = reduce(s, p);
  const int n = s.dim();
  if (rs.L == 0.0) throw std::domain_error("LRL vector undefined for L = 0");

  auto refpt = resolve_reference(rs.polar, p, ref, rs.u_eq);
  if (!refpt) throw std::domain_error("no reference point of requested kind");

  DirectionResult out;
  out.ref = *refpt;
  out.sgn_v = sign_of(rs.polar.v);
  out.normalization =
      normalization ? *normalization : default_normalization(p, rs.L, rs.E);

  EffectivePotentialSpec spec{p, rs.L, rs.u_eq};
  Radicand rad{spec, rs.E};
  const double r = rs.polar.r;
  const double w = rad(r);

  // derivative form: needs v bounded away from zero; near an apsis fall
  // back to the direct assembly
  if (w > 1e-6 * rad.scale(r)) {
    const double phi0 = phi0_integral(rs, p, *refpt, tol);
    double side = (r >= refpt->r0) ? 1.0 : -1.0;
    // d/dr cos(phi0) via the fundamental theorem of calculus on phi
    double g = std::abs(rs.L) / (r * r * std::sqrt(w));
    double dcos = -std::sin(phi0) * g * side;
    Bivector b = bivector_from_state(s);
    auto vdotL = b.contract(s.v);
    const double normL2 = 2.0 * rs.L * rs.L;
    out.theta_hat.resize(n);
    for (int i = 0; i < n; ++i)
      out.theta_hat[i] = (std::cos(phi0) + r * dcos) / r * s.r[i] +
                         2.0 * r * r * dcos / normL2 * vdotL[i];
    out.theta_hat_perp = theta_hat_perp(out.theta_hat, b);
  } else {
    DirectionResult direct = theta_hat(s, p, ref, tol);
    out.theta_hat = direct.theta_hat;
    out.theta_hat_perp = direct.theta_hat_perp;
  }
  out.A.resize(n);
  for (int i = 0; i < n; ++i) out.A[i] = out.normalization * out.theta_hat[i];
  return out;
}

std::optional<DirectionResult> lrl_variant(const CartesianState& s,
                                           const RadialPotential& p,
                                           std::optional<double> normalization,
                                           double tol) {
  ReducedState rs = reduce(s, p);
  auto refpt = resolve_reference(rs.polar, p, RefKind::inertial, rs.u_eq);
  if (!refpt) return std::nullopt;  // no inertial point: explicit unavailable
  return lrl_vector(s, p, RefKind::inertial, normalization, tol);
}

double temporal_ndim(const CartesianState& s, const RadialPotential& p,
                     RefKind ref, double tol) {
  ReducedState rs = reduce(s, p);
  auto refpt = resolve_reference(rs.polar, p, ref, rs.u_eq);
  if (!refpt) throw std::domain_error("no reference point of requested kind");
  EffectivePotentialSpec spec{p, rs.L, rs.u_eq};
  return time_integral(rs.polar, spec, *refpt, tol);
}

namespace {

// numerical rank by Gaussian elimination with full pivoting
int matrix_rank(std::vector<std::vector<double>> m, double threshold) {
  const int rows = int(m.size());
  if (rows == 0) return 0;
  const int cols = int(m[0].size());
  double max_abs = 0.0;
  for (const auto& row : m)
    for (double x : row) max_abs = std::max(max_abs, std::abs(x));
  if (max_abs == 0.0) return 0;

  int rank = 0;
  std::vector<bool> used_row(rows, false), used_col(cols, false);
  for (int step = 0; step < std::min(rows, cols); ++step) {
    int pr = -1, pc = -1;
    double best = threshold * max_abs;
    for (int i = 0; i < rows; ++i) {
      if (used_row[i]) continue;
      for (int j = 0; j < cols; ++j) {
        if (used_col[j]) continue;
        if (std::abs(m[i][j]) > best) {
          best = std::abs(m[i][j]);
          pr = i;
          pc = j;
        }
      }
    }
    if (pr < 0) break;
    ++rank;
    used_row[pr] = true;
    used_col[pc] = true;
    for (int i = 0; i < rows; ++i) {
      if (used_row[i] || m[i][pc] == 0.0) continue;
      double f = m[i][pc] / m[pr][pc];
      for (int j = 0; j < cols; ++j) m[i][j] -= f * m[pr][j];
    }
  }
  return rank;
}

}  // namespace

IndependenceReport count_independent(int n, const RadialPotential& p,
                                     std::uint64_t seed,
                                     double rank_threshold) {
  if (n < 2 || n > 8) throw std::invalid_argument("dimension must be in 2..8");
  IndependenceReport rep;
  rep.n = n;
  rep.bivector_components = n * (n - 1) / 2;
  rep.bivector_independent = 2 * n - 3;
  rep.theta_hat_independent = n - 1;
  rep.joint_geometric = 2 * n - 2;
  rep.total_independent = 2 * n;

  // random bounded state: start from a planar ellipse-type state and
  // rotate it into general position
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
  };
  CartesianState s;
  s.t = uniform(-1.0, 1.0);
  s.r.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.r[0] = uniform(1.0, 1.6);
  s.v[0] = uniform(0.1, 0.25);
  s.v[1] = uniform(0.7, 0.9);
  // random rotation through a few Givens rotations
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i + 1 < n; ++i) {
      double ang = uniform(0.0, 6.28);
      double c = std::cos(ang), sn = std::sin(ang);
      auto rot = [&](std::vector<double>& x) {
        double xi = x[i], xj = x[i + 1];
        x[i] = c * xi - sn * xj;
        x[i + 1] = sn * xi + c * xj;
      };
      rot(s.r);
      rot(s.v);
    }

  // component map: (r, v, t) -> (L_ij upper tri, theta_hat, E, T)
  auto components = [&](const CartesianState& state) {
    std::vector<double> out;
    Bivector b = bivector_from_state(state);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.push_back(b.component(i, j));
    DirectionResult th = theta_hat(state, p, RefKind::turning_min, 1e-13);
    for (double x : th.theta_hat) out.push_back(x);
    ReducedState rs = reduce(state, p);
    out.push_back(rs.E);
    out.push_back(temporal_ndim(state, p, RefKind::turning_min, 1e-13));
    return out;
  };

  const int m_rows = rep.bivector_components + n + 2;
  const int m_cols = 2 * n + 1;
  std::vector<std::vector<double>> jac(m_rows, std::vector<double>(m_cols));
  auto perturbed = [&](int col, double h) {
    CartesianState q = s;
    if (col < n)
      q.r[col] += h;
    else if (col < 2 * n)
      q.v[col - n] += h;
    else
      q.t += h;
    return components(q);
  };
  for (int col = 0; col < m_cols; ++col) {
    const double h = 1e-4;
    // Richardson-extrapolated centered differences
    auto fp = perturbed(col, h), fm = perturbed(col, -h);
    auto fp2 = perturbed(col, 0.5 * h), fm2 = perturbed(col, -0.5 * h);
    for (int row = 0; row < m_rows; ++row) {
      double d1 = (fp[row] - fm[row]) / (2.0 * h);
      double d2 = (fp2[row] - fm2[row]) / h;
      jac[row][col] = (4.0 * d2 - d1) / 3.0;
    }
  }
  rep.jacobian_rank = matrix_rank(jac, rank_threshold);
  return rep;
}

}  // namespace cfdyn
