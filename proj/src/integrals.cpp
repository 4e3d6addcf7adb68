#include "cfdyn/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cfdyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// sgn(v) at an apsis is fixed by continuity from the side the trajectory
// enters next: +1 leaving a periapsis, -1 leaving an apoapsis
int effective_sgn_v(const PolarState& s, const Radicand& rad) {
  if (s.v != 0.0) return sign_of(s.v);
  double h = 1e-8 * std::max(1.0, s.r);
  double w_out = rad(s.r + h), w_in = rad(s.r - h);
  return (w_out > w_in) ? +1 : -1;
}

struct Arc {
  double lo, hi;
  bool sing_lo, sing_hi;
};

// radial arc [r_lo, r_hi] containing r, with turning-point flags
Arc arc_around(const Radicand& rad, double r,
               const std::vector<Root>& turning) {
  Arc arc{rad.spec.potential.domain_lo(), rad.spec.potential.domain_hi(),
          false, false};
  for (const auto& root : turning) {
    if (root.r <= r && root.r > arc.lo) {
      arc.lo = root.r;
      arc.sing_lo = true;
    }
    if (root.r >= r && root.r < arc.hi) {
      arc.hi = root.r;
      arc.sing_hi = true;
    }
  }
  return arc;
}

// signed integral int_{r0}^{r} f drho where f carries an inverse-sqrt
// singularity at flagged arc ends; when r sits close to a singular far
// end, integrate the full span and subtract the complement so the
// substitution always acts at an exact root
double integral_from_reference(const Radicand& rad, IntegrandKind kind,
                               double r0, bool r0_singular, double r,
                               const Arc& arc, double tol) {
  auto piece = [&](double a, double b, bool sa, bool sb) {
    SingularIntegralSpec s;
    s.rad = rad;
    s.kind = kind;
    s.a = a;
    s.b = b;
    s.singular_a = sa;
    s.singular_b = sb;
    s.tol = tol;
    QuadResult q = integrate_singular(s);
    if (!q.converged)
      throw std::runtime_error("quadrature failed to reach tolerance");
    return q.value;
  };

  double sign = 1.0;
  double lo = r0, hi = r;
  bool sing_lo = r0_singular, sing_hi = false;
  if (r < r0) {
    lo = r;
    hi = r0;
    sing_lo = false;
    sing_hi = r0_singular;
    sign = -1.0;
  }
  if (hi - lo < 1e-15 * std::max(1.0, hi)) return 0.0;

  // near-apsis state at the non-reference end: difference of two
  // substituted integrals over exact roots
  if (sign > 0 && arc.sing_hi && std::isfinite(arc.hi) &&
      (arc.hi - r) < 0.15 * (arc.hi - lo)) {
    return sign * (piece(lo, arc.hi, sing_lo, true) -
                   piece(r, arc.hi, false, true));
  }
  if (sign < 0 && arc.sing_lo && (r - arc.lo) < 0.15 * (hi - arc.lo)) {
    return sign * (piece(arc.lo, hi, true, sing_hi) -
                   piece(arc.lo, r, true, false));
  }
  // flag the state end too when it sits on (or numerically at) a root
  if (sign > 0 && arc.sing_hi && r >= arc.hi * (1.0 - 1e-12)) sing_hi = true;
  if (sign < 0 && arc.sing_lo && r <= arc.lo * (1.0 + 1e-12)) sing_lo = true;
  return sign * piece(lo, hi, sing_lo, sing_hi);
}

}  // namespace

double angular_momentum(const PolarState& s) { return s.omega * s.r * s.r; }

double energy(const PolarState& s, const EffectivePotentialSpec& spec) {
  double L = angular_momentum(s);
  return 0.5 * s.v * s.v + 0.5 * L * L / (s.r * s.r) +
         spec.potential.value(s.r) - spec.u_eq;
}

PolarState state_on_shell(const EffectivePotentialSpec& spec, double E,
                          double r, int sgn_v, double t, double theta) {
  Radicand rad{spec, E};
  double w = rad(r);
  if (w < -1e-12 * rad.scale(r))
    throw std::domain_error("radius outside the (L, E) shell");
  w = std::max(w, 0.0);
  PolarState s;
  s.t = t;
  s.r = r;
  s.theta = theta;
  s.v = sgn_v * std::sqrt(w);
  s.omega = spec.L / (r * r);
  return s;
}

std::optional<ReferencePoint> resolve_reference(const PolarState& s,
                                                const RadialPotential& p,
                                                RefKind kind, double u_eq) {
  EffectivePotentialSpec spec{p, angular_momentum(s), u_eq};
  Radicand rad{spec, energy(s, spec)};
  if (kind == RefKind::inertial) {
    auto ips = find_inertial_points(rad);
    if (ips.empty()) return std::nullopt;
    // nearest inertial point to the state's radius
    int best = 0;
    for (int i = 1; i < int(ips.size()); ++i)
      if (std::abs(ips[i].r - s.r) < std::abs(ips[best].r - s.r)) best = i;
    return ReferencePoint{RefKind::inertial, ips[best].r, best};
  }
  auto tps = find_turning_points(rad);
  if (tps.empty()) return std::nullopt;
  if (tps.front().multiplicity > 1) return std::nullopt;  // circular
  if (kind == RefKind::turning_min)
    return ReferencePoint{RefKind::turning_min, tps.front().r, 0};
  if (tps.size() < 2) return std::nullopt;
  return ReferencePoint{RefKind::turning_max, tps.back().r,
                        int(tps.size()) - 1};
}

double theta_integral(const PolarState& s, const EffectivePotentialSpec& spec0,
                      const ReferencePoint& ref, double tol) {
  // on-shell projection: L and E come from the state
  EffectivePotentialSpec spec{spec0.potential, angular_momentum(s), spec0.u_eq};
  if (spec.L == 0.0) return s.theta;  // radial line, independent of r0
  double E = energy(s, spec);
  Radicand rad{spec, E};
  auto tps = find_turning_points(rad);
  if (!tps.empty() && tps.front().multiplicity > 1)
    throw std::domain_error("Theta undefined for circular solutions");
  Arc arc = arc_around(rad, s.r, tps);
  if (s.r < arc.lo * (1.0 - 1e-9) || s.r > arc.hi * (1.0 + 1e-9))
    throw std::domain_error("state radius outside branch domain");
  int sv = effective_sgn_v(s, rad);
  bool r0_singular = ref.kind != RefKind::inertial;
  double integral = integral_from_reference(rad, IntegrandKind::angular,
                                            ref.r0, r0_singular, s.r, arc, tol);
  return s.theta - sv * integral;
}

double time_integral(const PolarState& s, const EffectivePotentialSpec& spec0,
                     const ReferencePoint& ref, double tol) {
  EffectivePotentialSpec spec{spec0.potential, angular_momentum(s), spec0.u_eq};
  double E = energy(s, spec);
  Radicand rad{spec, E};
  auto tps = find_turning_points(rad);
  if (!tps.empty() && tps.front().multiplicity > 1)
    throw std::domain_error("T undefined for circular solutions");
  Arc arc = arc_around(rad, s.r, tps);
  if (s.r < arc.lo * (1.0 - 1e-9) || s.r > arc.hi * (1.0 + 1e-9))
    throw std::domain_error("state radius outside branch domain");
  int sv = effective_sgn_v(s, rad);
  bool r0_singular = ref.kind != RefKind::inertial;
  double integral = integral_from_reference(rad, IntegrandKind::temporal,
                                            ref.r0, r0_singular, s.r, arc, tol);
  return s.t - sv * integral;
}

FirstIntegralSet first_integrals(const PolarState& s,
                                 const EffectivePotentialSpec& spec0,
                                 RefKind kind, double tol) {
  FirstIntegralSet out;
  EffectivePotentialSpec spec{spec0.potential, angular_momentum(s), spec0.u_eq};
  out.L = spec.L;
  out.E = energy(s, spec);
  out.sgn_v = sign_of(s.v);

  if (out.L == 0.0) {
    // radial trajectory: Theta is the line angle, independent of r0
    out.Theta = s.theta;
    out.branch_note = "radial";
    return out;
  }
  Classification cls = classify_trajectory(spec, out.E);
  if (cls.kind == TrajectoryClass::circular) {
    out.branch_note = "circular: Theta/T undefined";
    return out;
  }
  auto ref = resolve_reference(s, spec.potential, kind, spec.u_eq);
  if (!ref) {
    out.branch_note = "no reference point of requested kind";
    return out;
  }
  out.ref = *ref;
  Radicand rad{spec, out.E};
  if (out.sgn_v == 0) out.sgn_v = effective_sgn_v(s, rad);
  out.Theta = theta_integral(s, spec, *ref, tol);
  out.T = time_integral(s, spec, *ref, tol);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "arc with sgn(v)=%+d referred to %s at r0=%.17g", out.sgn_v,
                ref->kind == RefKind::inertial
                    ? "inertial point"
                    : (ref->kind == RefKind::turning_min ? "periapsis"
                                                         : "apoapsis"),
                ref->r0);
  out.branch_note = buf;
  return out;
}

bool rational_multiple(double x, long max_q, double tol, long* p_out,
                       long* q_out) {
  for (long q = 1; q <= max_q; ++q) {
    double p = std::round(x * q);
    if (std::abs(x - p / q) <= tol) {
      if (p_out) *p_out = long(p);
      if (q_out) *q_out = q;
      return true;
    }
  }
  return false;
}

ApsidalAngle apsidal_angle(const EffectivePotentialSpec& spec, double E,
                           double tol) {
  Classification cls = classify_trajectory(spec, E);
  if (cls.kind != TrajectoryClass::bounded_noncircular)
    throw std::domain_error("apsidal angle needs a bounded non-circular trajectory");
  Radicand rad{spec, E};
  auto tps = find_turning_points(rad);
  SingularIntegralSpec s;
  s.rad = rad;
  s.kind = IntegrandKind::angular;
  s.a = tps.front().r;
  s.b = tps.back().r;
  s.singular_a = s.singular_b = true;
  s.tol = tol;
  QuadResult q = integrate_singular(s);
  if (!q.converged) throw std::runtime_error("apsidal angle quadrature failed");
  ApsidalAngle out;
  out.value = 2.0 * q.value;
  out.mod_2pi = std::fmod(std::fmod(out.value, 2.0 * kPi) + 2.0 * kPi, 2.0 * kPi);
  out.closed = rational_multiple(out.value / (2.0 * kPi), 64, 1e-9, &out.p, &out.q);
  return out;
}

double radial_period(const EffectivePotentialSpec& spec, double E, double tol) {
  Classification cls = classify_trajectory(spec, E);
  if (cls.kind != TrajectoryClass::bounded_noncircular)
    throw std::domain_error("radial period needs a bounded non-circular trajectory");
  Radicand rad{spec, E};
  auto tps = find_turning_points(rad);
  SingularIntegralSpec s;
  s.rad = rad;
  s.kind = IntegrandKind::temporal;
  s.a = tps.front().r;
  s.b = tps.back().r;
  s.singular_a = s.singular_b = true;
  s.tol = tol;
  QuadResult q = integrate_singular(s);
  if (!q.converged) throw std::runtime_error("radial period quadrature failed");
  return 2.0 * q.value;
}

ConservationReport conservation_residual(
    const std::function<double(const PolarState&)>& evaluator,
    const Trajectory& traj, bool piecewise, int samples_per_arc) {
  ConservationReport rep;
  if (!piecewise) {
    double i0 = evaluator(traj.states.front());
    for (const auto& s : traj.states)
      rep.max_drift = std::max(rep.max_drift, std::abs(evaluator(s) - i0));
    rep.arc_drifts.push_back(rep.max_drift);
    return rep;
  }

  // arc boundaries: trajectory ends plus apsis events
  std::vector<double> cuts{traj.t_begin()};
  std::vector<Event::Kind> cut_kinds;
  for (const auto& ev : traj.events)
    if (ev.kind != Event::Kind::inertial_crossing) {
      cuts.push_back(ev.t);
      cut_kinds.push_back(ev.kind);
    }
  cuts.push_back(traj.t_end());

  std::vector<double> arc_means;
  for (std::size_t a = 0; a + 1 < cuts.size(); ++a) {
    const double t0 = cuts[a], t1 = cuts[a + 1];
    if (t1 - t0 < 1e-12) continue;
    // keep clear of the apsides where the integrands are singular
    const double margin = 0.05 * (t1 - t0);
    double lo_val = 0.0, hi_val = 0.0, mean = 0.0;
    bool first = true;
    int used = 0;
    for (int i = 0; i < samples_per_arc; ++i) {
      double t = t0 + margin + (t1 - t0 - 2 * margin) * double(i) /
                                   std::max(1, samples_per_arc - 1);
      double val = evaluator(traj.state_at(t));
      if (first) {
        lo_val = hi_val = val;
        first = false;
      }
      lo_val = std::min(lo_val, val);
      hi_val = std::max(hi_val, val);
      mean += val;
      ++used;
    }
    if (used == 0) continue;
    rep.arc_drifts.push_back(hi_val - lo_val);
    rep.max_drift = std::max(rep.max_drift, hi_val - lo_val);
    arc_means.push_back(mean / used);
  }
  for (std::size_t a = 0; a + 1 < arc_means.size(); ++a) {
    rep.jumps.push_back(arc_means[a + 1] - arc_means[a]);
    rep.jump_kinds.push_back(cut_kinds[a]);
  }
  return rep;
}

std::vector<CurveSample> shape_curve(const EffectivePotentialSpec& spec,
                                     double E, double Theta,
                                     const ReferencePoint& ref,
                                     const std::vector<double>& r_samples,
                                     int sgn_v, double tol) {
  Radicand rad{spec, E};
  auto tps = find_turning_points(rad);
  std::vector<CurveSample> out;
  out.reserve(r_samples.size());
  for (double r : r_samples) {
    CurveSample cs{r, 0.0, false};
    try {
      if (!spec.potential.in_domain(r) || rad(r) < -1e-12 * rad.scale(r))
        throw std::domain_error("sample outside radial domain");
      Arc arc = arc_around(rad, r, tps);
      bool r0_singular = ref.kind != RefKind::inertial;
      double integral = integral_from_reference(
          rad, IntegrandKind::angular, ref.r0, r0_singular, r, arc, tol);
      cs.theta = Theta + sgn_v * integral;
      cs.ok = true;
    } catch (const std::exception&) {
      cs.ok = false;  // per-sample error marker
    }
    out.push_back(cs);
  }
  return out;
}

}  // namespace cfdyn
