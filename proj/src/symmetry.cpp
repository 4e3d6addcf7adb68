#include "cfdyn/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfdyn/quadrature.hpp"

namespace cfdyn {

namespace {

double step_for(double x, double h) { return std::max(h, h * std::abs(x)); }

// Theta - theta and T - t as functions of (r, L, E) on the sgn_v branch,
// with the reference point recomputed from (L, E) at every call.
class BasePotentials {
 public:
  BasePotentials(const RadialPotential& p, RefKind ref, int sgn_v)
      : p_(p), ref_(ref), sgn_v_(sgn_v), u_eq_(equilibrium_point(p).u_eq) {}

  double theta0(double r, double L, double E) const {
    PolarState s = state_on_shell(r, L, E);
    EffectivePotentialSpec spec{p_, L, u_eq_};
    auto ref = resolve_reference(s, p_, ref_, u_eq_);
    if (!ref) throw std::domain_error("reference point vanished under perturbation");
    return theta_integral(s, spec, *ref, quad_tol_);
  }
  double t0(double r, double L, double E) const {
    PolarState s = state_on_shell(r, L, E);
    EffectivePotentialSpec spec{p_, L, u_eq_};
    auto ref = resolve_reference(s, p_, ref_, u_eq_);
    if (!ref) throw std::domain_error("reference point vanished under perturbation");
    return time_integral(s, spec, *ref, quad_tol_);
  }

  // W must stay clear of zero over the whole FD stencil
  void guard_apsis(double r, double L, double E, double h) const {
    EffectivePotentialSpec spec{p_, L, u_eq_};
    Radicand rad{spec, E};
    double w = rad(r);
    double margin = 10.0 * h * (2.0 * std::abs(L) / (r * r) + 2.0);
    if (w <= margin) throw std::domain_error("too close to apsis");
  }

  double u_eq() const { return u_eq_; }
  const RadialPotential& potential() const { return p_; }
  int sgn_v() const { return sgn_v_; }

 private:
  PolarState state_on_shell(double r, double L, double E) const {
    EffectivePotentialSpec spec{p_, L, u_eq_};
    Radicand rad{spec, E};
    double w = rad(r);
    if (w < 0.0) throw std::domain_error("state outside the radial domain");
    PolarState s;
    s.t = 0.0;
    s.r = r;
    s.theta = 0.0;
    s.v = sgn_v_ * std::sqrt(w);
    s.omega = L / (r * r);
    return s;
  }

  const RadialPotential& p_;
  RefKind ref_;
  int sgn_v_;
  double u_eq_;
  double quad_tol_ = 1e-13;
};

// Richardson-extrapolated centered difference
double fd1(const std::function<double(double)>& f, double x, double h) {
  auto d = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

// second partial d^2 f / dx dy (x == y allowed) with Richardson
double fd2(const std::function<double(double, double)>& f, double x, double y,
           double hx, double hy, bool same) {
  auto stencil = [&](double ax, double ay) {
    if (same) {
      return (f(x + ax, y) - 2.0 * f(x, y) + f(x - ax, y)) / (ax * ax);
    }
    return (f(x + ax, y + ay) - f(x + ax, y - ay) - f(x - ax, y + ay) +
            f(x - ax, y - ay)) /
           (4.0 * ax * ay);
  };
  double d1 = stencil(hx, hy);
  double d2 = stencil(0.5 * hx, 0.5 * hy);
  return (16.0 * d2 - d1) / 15.0;
}

// 12-point Gauss-Legendre nodes/weights on [0, 1]
constexpr double kGl12x[12] = {
    0.009219682876640375, 0.047941371814762575, 0.115048662902847656,
    0.206341022856691276, 0.316084250500909903, 0.437383295744265542,
    0.562616704255734458, 0.683915749499090097, 0.793658977143308724,
    0.884951337097152344, 0.952058628185237425, 0.990780317123359625};
constexpr double kGl12w[12] = {
    0.023587668193255914, 0.053469662997659215, 0.080039164271673113,
    0.101583713361532961, 0.116746268269177404, 0.124573522906701393,
    0.124573522906701393, 0.116746268269177404, 0.101583713361532961,
    0.080039164271673113, 0.053469662997659215, 0.023587668193255914};

}  // namespace

GeneratorComponents generator_components(Generator g, const ExtPoint& pt,
                                         const RadialPotential& p, RefKind ref,
                                         double fd_step) {
  GeneratorComponents out;
  switch (g) {
    case Generator::X_L:
      out.eta_theta = -1.0;
      return out;
    case Generator::X_E:
      out.eta_t = 1.0;
      return out;
    default:
      break;
  }
  BasePotentials base(p, ref, pt.sgn_v);
  const double hL = step_for(pt.L, fd_step);
  const double hE = step_for(pt.E, fd_step);
  base.guard_apsis(pt.r, pt.L, pt.E, std::max(hL, hE));

  if (g == Generator::X_Theta) {
    out.eta_t = fd1([&](double E) { return base.theta0(pt.r, pt.L, E); }, pt.E, hE);
    out.eta_theta =
        -fd1([&](double L) { return base.theta0(pt.r, L, pt.E); }, pt.L, hL);
    out.eta_L = 1.0;
  } else {
    out.eta_t = fd1([&](double E) { return base.t0(pt.r, pt.L, E); }, pt.E, hE);
    out.eta_theta =
        -fd1([&](double L) { return base.t0(pt.r, L, pt.E); }, pt.L, hL);
    out.eta_E = -1.0;
  }
  return out;
}

ExtPoint apply_group(Generator g, double eps, const ExtPoint& pt,
                     const RadialPotential& p, RefKind ref) {
  ExtPoint out = pt;
  switch (g) {
    case Generator::X_L:
      out.theta -= eps;
      return out;
    case Generator::X_E:
      out.t += eps;
      return out;
    case Generator::X_Theta: {
      BasePotentials base(p, ref, pt.sgn_v);
      // theta flow is exact: d theta/d eps = -Theta_L(r, L+s, E)
      out.L = pt.L + eps;
      out.theta = pt.theta + base.theta0(pt.r, pt.L, pt.E) -
                  base.theta0(pt.r, out.L, pt.E);
      // t flow integrated in the group parameter
      double dt = 0.0;
      for (int i = 0; i < 12; ++i) {
        double s = eps * kGl12x[i];
        double hE = step_for(pt.E, 1e-6);
        dt += eps * kGl12w[i] *
              fd1([&](double E) { return base.theta0(pt.r, pt.L + s, E); },
                  pt.E, hE);
      }
      out.t = pt.t + dt;
      return out;
    }
    case Generator::X_T: {
      BasePotentials base(p, ref, pt.sgn_v);
      out.E = pt.E - eps;
      // exiting the non-circular regime is a domain error; probe first
      out.t = pt.t + base.t0(pt.r, pt.L, pt.E) - base.t0(pt.r, pt.L, out.E);
      double dth = 0.0;
      for (int i = 0; i < 12; ++i) {
        double s = eps * kGl12x[i];
        double hL = step_for(pt.L, 1e-6);
        dth -= eps * kGl12w[i] *
               fd1([&](double L) { return base.t0(pt.r, L, pt.E - s); }, pt.L,
                   hL);
      }
      out.theta = pt.theta + dth;
      return out;
    }
  }
  return out;
}

std::array<double, 4> action_on_integrals(Generator g, const PolarState& s,
                                          const RadialPotential& p, RefKind ref,
                                          double fd_step) {
  const double u_eq = equilibrium_point(p).u_eq;
  EffectivePotentialSpec spec0{p, angular_momentum(s), u_eq};
  ExtPoint pt;
  pt.t = s.t;
  pt.r = s.r;
  pt.theta = s.theta;
  pt.L = angular_momentum(s);
  pt.E = energy(s, spec0);
  pt.sgn_v = s.v >= 0.0 ? +1 : -1;

  BasePotentials base(p, ref, pt.sgn_v);
  auto integrals_at = [&](const ExtPoint& q) {
    std::array<double, 4> vals;
    vals[0] = q.L;
    vals[1] = q.E;
    vals[2] = q.theta + base.theta0(q.r, q.L, q.E);
    vals[3] = q.t + base.t0(q.r, q.L, q.E);
    return vals;
  };

  const double h = fd_step;
  ExtPoint plus = apply_group(g, h, pt, p, ref);
  ExtPoint minus = apply_group(g, -h, pt, p, ref);
  auto vp = integrals_at(plus);
  auto vm = integrals_at(minus);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = (vp[i] - vm[i]) / (2.0 * h);
  return out;
}

double commutator_residual(Generator g1, Generator g2, const ExtPoint& pt,
                           const RadialPotential& p, RefKind ref,
                           double fd_step) {
  // all four fields have the form eta_t(r,L,E) d_t + eta_theta(r,L,E) d_theta
  // + c_L d_L + c_E d_E, so the bracket reduces to L/E-derivatives of the
  // t/theta components
  struct Field {
    double c_L = 0.0, c_E = 0.0;
    // base potential whose partials give the components: nullptr for the
    // constant fields X_L, X_E
    const char* which = nullptr;  // "theta" or "t"
  };
  auto field_of = [](Generator g) {
    Field f;
    switch (g) {
      case Generator::X_L: break;
      case Generator::X_E: break;
      case Generator::X_Theta: f.c_L = 1.0; f.which = "theta"; break;
      case Generator::X_T: f.c_E = -1.0; f.which = "t"; break;
    }
    return f;
  };
  Field f1 = field_of(g1), f2 = field_of(g2);
  if (!f1.which && !f2.which) return 0.0;  // constant-coefficient fields

  BasePotentials base(p, ref, pt.sgn_v);
  const double hL = step_for(pt.L, fd_step);
  const double hE = step_for(pt.E, fd_step);
  base.guard_apsis(pt.r, pt.L, pt.E, 10.0 * std::max(hL, hE));

  // eta_t = d(base)/dE, eta_theta = -d(base)/dL for the dynamical fields;
  // directional derivative of those along (c_L, c_E) needs second partials
  auto second = [&](const char* which, char a, char b) {
    auto f = [&](double L, double E) {
      return which[0] == 't' && which[1] == 'h' ? base.theta0(pt.r, L, E)
                                                : base.t0(pt.r, L, E);
    };
    if (a == 'L' && b == 'L')
      return fd2([&](double x, double) { return f(x, pt.E); }, pt.L, pt.E, hL,
                 hL, true);
    if (a == 'E' && b == 'E')
      return fd2([&](double x, double) { return f(pt.L, x); }, pt.E, pt.L, hE,
                 hE, true);
    return fd2(f, pt.L, pt.E, hL, hE, false);
  };

  // X(eta^Y) for the t and theta components
  auto directional = [&](const Field& x, const Field& y, char comp) {
    if (!y.which) return 0.0;  // constant field has zero derivatives
    // y's component: eta_t = d base/dE, eta_theta = -d base/dL
    double dL, dE;
    if (comp == 't') {
      dL = second(y.which, 'L', 'E');   // d/dL of dbase/dE
      dE = second(y.which, 'E', 'E');
    } else {
      dL = -second(y.which, 'L', 'L');  // d/dL of -dbase/dL
      dE = -second(y.which, 'L', 'E');
    }
    return x.c_L * dL + x.c_E * dE;
  };

  double bt = directional(f1, f2, 't') - directional(f2, f1, 't');
  double bth = directional(f1, f2, 'h') - directional(f2, f1, 'h');
  return std::hypot(bt, bth);
}

double theta_group_relation_residual(const ExtPoint& pt,
                                     const RadialPotential& p, RefKind ref,
                                     double fd_step) {
  BasePotentials base(p, ref, pt.sgn_v);
  const double hL = step_for(pt.L, fd_step);
  const double hE = step_for(pt.E, fd_step);
  double theta_E =
      fd1([&](double E) { return base.theta0(pt.r, pt.L, E); }, pt.E, hE);
  double theta_L =
      fd1([&](double L) { return base.theta0(pt.r, L, pt.E); }, pt.L, hL);
  double rhs = -pt.L * theta_L / (2.0 * (pt.E - p.value(pt.r)));
  return std::abs(theta_E - rhs);
}

std::pair<double, double> noether_multiplier(
    const std::function<double(const PolarState&)>& integral,
    const PolarState& s, double fd_step) {
  const double hv = step_for(s.v, fd_step);
  const double hw = step_for(s.omega, fd_step);
  double i_v = fd1(
      [&](double v) {
        PolarState q = s;
        q.v = v;
        return integral(q);
      },
      s.v, hv);
  double i_om = fd1(
      [&](double om) {
        PolarState q = s;
        q.omega = om;
        return integral(q);
      },
      s.omega, hw);
  return {-i_v, -i_om / (s.r * s.r)};
}

double noether_identity_residual(
    const std::function<double(const PolarState&)>& integral, const JetPoint& jp,
    const RadialPotential& p, double fd_step) {
  const PolarState& s = jp.s;
  auto part = [&](auto setter, double x0) {
    return fd1(
        [&](double x) {
          PolarState q = s;
          setter(q, x);
          return integral(q);
        },
        x0, step_for(x0, fd_step));
  };
  double i_t = part([](PolarState& q, double x) { q.t = x; }, s.t);
  double i_r = part([](PolarState& q, double x) { q.r = x; }, s.r);
  double i_th = part([](PolarState& q, double x) { q.theta = x; }, s.theta);
  double i_v = part([](PolarState& q, double x) { q.v = x; }, s.v);
  double i_om = part([](PolarState& q, double x) { q.omega = x; }, s.omega);

  // lhs: chain rule with the jet point's free accelerations
  double lhs = i_t + s.v * i_r + s.omega * i_th + jp.a_r * i_v +
               jp.a_theta * i_om;
  // rhs: -dL/dr I_v - dL/dtheta r^-2 I_omega with the variational
  // derivatives at the same jet point
  double dLdr = s.omega * s.omega * s.r + p.force(s.r) - jp.a_r;
  double dLdth = -2.0 * s.omega * s.v * s.r - s.r * s.r * jp.a_theta;
  double rhs = -dLdr * i_v - dLdth * i_om / (s.r * s.r);
  return std::abs(lhs - rhs);
}

PointSymmetry rotation_generator() {
  PointSymmetry g;
  g.psi.f = [](double, double, double) { return 1.0; };
  return g;
}

PointSymmetry time_translation_generator() {
  PointSymmetry g;
  g.tau.f = [](double, double, double) { return 1.0; };
  return g;
}

PointSymmetry scaling_generator(double p) {
  PointSymmetry g;
  g.tau.f = [](double t, double, double) { return t; };
  g.tau.f_t = [](double, double, double) { return 1.0; };
  const double c = 2.0 / (1.0 - p);
  g.xi.f = [c](double, double r, double) { return c * r; };
  g.xi.f_r = [c](double, double, double) { return c; };
  return g;
}

PointSymmetry dilation_generator(double k) {
  PointSymmetry g;
  const double sk = std::sqrt(k);
  auto e = [sk](double t) { return std::exp(2.0 * sk * t); };
  g.tau.f = [e](double t, double, double) { return e(t); };
  g.tau.f_t = [e, sk](double t, double, double) { return 2.0 * sk * e(t); };
  g.tau.f_tt = [e, sk](double t, double, double) { return 4.0 * sk * sk * e(t); };
  g.xi.f = [e, sk](double t, double r, double) { return sk * r * e(t); };
  g.xi.f_t = [e, sk](double t, double r, double) { return 2.0 * sk * sk * r * e(t); };
  g.xi.f_r = [e, sk](double t, double, double) { return sk * e(t); };
  g.xi.f_tt = [e, sk](double t, double r, double) { return 4.0 * sk * sk * sk * r * e(t); };
  g.xi.f_tr = [e, sk](double t, double, double) { return 2.0 * sk * sk * e(t); };
  return g;
}

namespace {

struct FieldEval {
  double f, t, r, th, tt, tr, tth, rr, rth, thth;
};

FieldEval eval_field(const ScalarField& c, double t, double r, double th) {
  auto v = [&](const ScalarField::Fn& fn) { return fn ? fn(t, r, th) : 0.0; };
  return {v(c.f),  v(c.f_t),  v(c.f_r),   v(c.f_th), v(c.f_tt),
          v(c.f_tr), v(c.f_tth), v(c.f_rr), v(c.f_rth), v(c.f_thth)};
}

}  // namespace

double point_symmetry_residual(const PointSymmetry& gen,
                               const std::vector<PolarState>& samples,
                               const RadialPotential& p) {
  double worst = 0.0;
  for (const PolarState& s : samples) {
    const double r = s.r, v = s.v, om = s.omega;
    const double F = p.force(s.r);
    const double Fprime = p.force_derivative(r);
    // accelerations from the equations of motion
    const double ar = om * om * r + F;
    const double ath = -2.0 * om * v / r;
    const double dar = v * (Fprime - 3.0 * om * om);
    const double dath =
        -2.0 * (ath * v / r + om * ar / r - om * v * v / (r * r));

    FieldEval T = eval_field(gen.tau, s.t, r, s.theta);
    FieldEval X = eval_field(gen.xi, s.t, r, s.theta);
    FieldEval P = eval_field(gen.psi, s.t, r, s.theta);

    auto D = [&](const FieldEval& g) { return g.t + v * g.r + om * g.th; };
    auto D2 = [&](const FieldEval& g) {
      return g.tt + v * v * g.rr + om * om * g.thth + 2.0 * v * g.tr +
             2.0 * om * g.tth + 2.0 * v * om * g.rth;
    };

    const double Pr = X.f - v * T.f;
    const double dPr = D(X) - ar * T.f - v * D(T);
    const double dPth = D(P) - ath * T.f - om * D(T);
    const double d2Pr = D2(X) + ar * X.r + ath * X.th - T.f * dar -
                        2.0 * ar * D(T) - v * D2(T) -
                        v * (ar * T.r + ath * T.th);
    const double d2Pth = D2(P) + ar * P.r + ath * P.th - T.f * dath -
                         2.0 * ath * D(T) - om * D2(T) -
                         om * (ar * T.r + ath * T.th);

    const double res1 = d2Pr - om * om * Pr - 2.0 * om * r * dPth - Fprime * Pr;
    const double res2 = d2Pth + 2.0 * dPth * v / r + 2.0 * om * dPr / r -
                        2.0 * om * v * Pr / (r * r);
    worst = std::max({worst, std::abs(res1), std::abs(res2)});
  }
  return worst;
}

SpecialSymmetrySolution solve_special_symmetries(
    const RadialPotential& p, double L, double E,
    const std::vector<double>& r_grid, int sgn_v) {
  if (r_grid.size() < 2)
    throw std::invalid_argument("need at least two grid points");
  const double u_eq = equilibrium_point(p).u_eq;
  EffectivePotentialSpec spec{p, L, u_eq};
  Radicand rad{spec, E};
  for (double r : r_grid)
    if (rad(r) <= 0.0)
      throw std::domain_error(
          "grid crosses a turning point; split the integration");

  // anchor at the inertial point: Theta0 and T0 with the inertial
  // reference vanish identically there, so the partials follow from the
  // motion of r^*(L, E)
  auto ips = find_inertial_points(rad);
  if (ips.empty()) throw std::domain_error("no inertial point at this (L, E)");
  int nearest = 0;
  const double mid = 0.5 * (r_grid.front() + r_grid.back());
  for (int i = 1; i < int(ips.size()); ++i)
    if (std::abs(ips[i].r - mid) < std::abs(ips[nearest].r - mid)) nearest = i;
  const double r_star = ips[nearest].r;
  const double w_star = rad(r_star);
  if (w_star <= 0.0) throw std::domain_error("inertial point outside the arc");

  // dr*/dL from implicit differentiation of L^2 r^-3 = U'(r)
  const double upp = p.second_derivative(r_star);
  const double dr_star_dL =
      2.0 * L / (r_star * r_star * r_star) /
      (upp + 3.0 * L * L / std::pow(r_star, 4));
  // Theta0_r = -sgn(v) L/(r^2 sqrt W), T0_r = -sgn(v)/sqrt(W)
  const double theta0_r =
      -sgn_v * L / (r_star * r_star * std::sqrt(w_star));
  const double t0_r = -sgn_v / std::sqrt(w_star);
  // total derivative of the vanishing anchor value gives the partials
  const double theta_L_star = -theta0_r * dr_star_dL;  // d Theta0/dL at r*
  const double theta_E_star = 0.0;                     // r* independent of E
  const double t_L_star = -t0_r * dr_star_dL;
  const double t_E_star = 0.0;

  struct Rhs {
    double eta_L, eta_E;
  };
  auto rhs = [&](double r, Rhs basis) {
    const double w = rad(r);
    const double w32 = std::pow(w, 1.5);
    double d_eta_t = sgn_v * (basis.eta_L * L / (r * r) - basis.eta_E) / w32;
    double d_eta_th = sgn_v * (2.0 * (E - p.value(r)) * basis.eta_L -
                               L * basis.eta_E) /
                      (r * r * w32);
    return std::pair<double, double>{d_eta_t, d_eta_th};
  };

  auto integrate_basis = [&](Rhs basis, double eta_t0, double eta_th0) {
    // RK4 from the anchor r* to each grid point
    RecoveredGenerator rec;
    rec.r = r_grid;
    rec.components.resize(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      double a = r_star, b = r_grid[i];
      // the right-hand sides depend on r only, so this is composite
      // Simpson quadrature from the anchor
      int steps = std::max(64, int(std::ceil(std::abs(b - a) / 1e-3)));
      double h = (b - a) / steps;
      double et = eta_t0, eth = eta_th0;
      double x = a;
      for (int s = 0; s < steps; ++s) {
        auto k1 = rhs(x, basis);
        auto k2 = rhs(x + 0.5 * h, basis);
        auto k4 = rhs(x + h, basis);
        et += h / 6.0 * (k1.first + 4.0 * k2.first + k4.first);
        eth += h / 6.0 * (k1.second + 4.0 * k2.second + k4.second);
        x += h;
      }
      GeneratorComponents g;
      g.eta_t = et;
      g.eta_theta = eth;
      g.eta_L = basis.eta_L;
      g.eta_E = basis.eta_E;
      rec.components[i] = g;
    }
    return rec;
  };

  SpecialSymmetrySolution sol;
  // X_Theta: eta_t = Theta_E, eta_theta = -Theta_L
  sol.x_theta = integrate_basis({1.0, 0.0}, theta_E_star, -theta_L_star);
  // X_T: eta_t = T_E, eta_theta = -T_L
  sol.x_t = integrate_basis({0.0, -1.0}, t_E_star, -t_L_star);
  sol.x_l.eta_theta = -1.0;
  sol.x_e.eta_t = 1.0;
  return sol;
}

}  // namespace cfdyn
