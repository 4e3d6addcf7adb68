#include "cfdyn/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace cfdyn {
namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (positive half; symmetric).
// All Kronrod nodes are interior, so flagged endpoints are never evaluated.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double value;
  double error;
};

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  double kron = 0.0, gauss = 0.0;
  for (int i = 0; i < 7; ++i) kron += kWgk[i] * (fv[i] + fv[14 - i]);
  kron += kWgk[7] * fv[7];
  for (int i = 0; i < 3; ++i) gauss += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  gauss += kWg[3] * fv[7];
  Panel p;
  p.value = kron * h;
  p.error = std::abs((kron - gauss) * h);
  return p;
}

// left-to-right adaptive bisection; recursion keeps summation order fixed.
// Panels below res_floor are at the evaluation-noise resolution limit and
// are accepted as-is (their estimates count toward the reported error).
void refine(const std::function<double(double)>& f, double a, double b,
            Panel panel, double tol_per_len, double res_floor, int depth,
            int max_depth, double* value, double* error, bool* converged) {
  if (panel.error <= tol_per_len * (b - a) ||
      panel.error < 4e-16 * std::abs(panel.value) || (b - a) <= res_floor) {
    *value += panel.value;
    *error += panel.error;
    return;
  }
  if (depth >= max_depth) {
    *value += panel.value;
    *error += panel.error;
    *converged = false;
    return;
  }
  const double m = 0.5 * (a + b);
  refine(f, a, m, gauss_kronrod(f, a, m), tol_per_len, res_floor, depth + 1,
         max_depth, value, error, converged);
  refine(f, m, b, gauss_kronrod(f, m, b), tol_per_len, res_floor, depth + 1,
         max_depth, value, error, converged);
}

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double tol, int max_depth) {
  QuadResult out;
  if (a == b) return out;
  double value = 0.0, error = 0.0;
  bool converged = true;
  const double res_floor = 1e-8 * (b - a);
  refine(f, a, b, gauss_kronrod(f, a, b), tol / (b - a), res_floor, 0,
         max_depth, &value, &error, &converged);
  out.value = value;
  out.error_estimate = error;
  out.converged = converged;
  return out;
}

}  // namespace

QuadResult integrate_sqrt_endpoints(const std::function<double(double)>& f,
                                    double a, double b, bool singular_a,
                                    bool singular_b, double tol, int max_depth) {
  QuadResult out;
  if (!(b > a)) return out;

  if (singular_a && singular_b) {
    const double m = 0.5 * (a + b);
    QuadResult left = integrate_sqrt_endpoints(f, a, m, true, false, 0.5 * tol,
                                               max_depth);
    QuadResult right = integrate_sqrt_endpoints(f, m, b, false, true, 0.5 * tol,
                                                max_depth);
    out.value = left.value + right.value;
    out.error_estimate = left.error_estimate + right.error_estimate;
    out.converged = left.converged && right.converged;
    return out;
  }
  // Below s_floor the shift s^2 falls under the rounding resolution of the
  // endpoint and the integrand turns into pure evaluation noise; the
  // substituted integrand is continuous there, so clamp instead.
  const double span = std::sqrt(b - a);
  const double s_floor =
      span * 8.0 * std::sqrt(std::numeric_limits<double>::epsilon());
  if (singular_a) {
    // r = a + s^2 turns C/sqrt(r-a) into a bounded integrand
    auto g = [&, s_floor](double s) {
      s = std::max(s, s_floor);
      return 2.0 * s * f(a + s * s);
    };
    return integrate_adaptive(g, 0.0, span, tol, max_depth);
  }
  if (singular_b) {
    auto g = [&, s_floor](double s) {
      s = std::max(s, s_floor);
      return 2.0 * s * f(b - s * s);
    };
    return integrate_adaptive(g, 0.0, span, tol, max_depth);
  }
  return integrate_adaptive(f, a, b, tol, max_depth);
}

namespace {

// Stable divided difference (U(r) - U(e)) / (r - e); exact closed forms
// for the analytic kinds, second-order Taylor at the endpoint otherwise.
double potential_divdiff(const RadialPotential& p, double r, double e) {
  switch (p.kind()) {
    case PotentialKind::kepler:
      return p.k() / (r * e);
    case PotentialKind::perturbed:
      return p.k() / (r * e) + p.kappa() * (r + e) / (2.0 * r * r * e * e);
    default:
      return p.derivative(e) + 0.5 * p.second_derivative(e) * (r - e);
  }
}

// (W(r) - W(e)) / (r - e) without cancellation
double radicand_divdiff(const Radicand& rad, double r, double e) {
  const double L = rad.spec.L;
  return -2.0 * potential_divdiff(rad.spec.potential, r, e) +
         L * L * (r + e) / (r * r * e * e);
}

double integrand_factor(const SingularIntegralSpec& spec, double r) {
  return spec.kind == IntegrandKind::angular ? spec.rad.spec.L / (r * r) : 1.0;
}

// One piece with at most one singular end. At a flagged end the zero of W
// is divided out analytically, so the substituted integrand is smooth all
// the way into the corner (no 1/sqrt evaluation noise).
QuadResult integrate_piece(const SingularIntegralSpec& spec, double a, double b,
                           bool sing_a, bool sing_b, double tol) {
  const Radicand rad = spec.rad;
  if (sing_a || sing_b) {
    const double end = sing_a ? a : b;
    const double sign = sing_a ? 1.0 : -1.0;
    const bool analytic = rad.spec.potential.kind() != PotentialKind::custom &&
                          rad.spec.potential.kind() != PotentialKind::power;
    const double span = b - a;
    auto g = [rad, end, sign, analytic, span, &spec](double s) {
      const double r = end + sign * s * s;
      // near the end (always, when the divided difference is exact) use
      // the factored radicand; else evaluate W directly
      if (analytic || s * s < 1e-5 * span) {
        double dw = sign * radicand_divdiff(rad, r, end);
        return 2.0 * integrand_factor(spec, r) / std::sqrt(std::max(dw, 0.0));
      }
      double w = rad(r);
      return 2.0 * s * integrand_factor(spec, r) /
             std::sqrt(std::max(w, 0.0));
    };
    return integrate_adaptive(g, 0.0, std::sqrt(span), tol, 40);
  }
  auto f = [rad, &spec](double r) {
    return integrand_factor(spec, r) / std::sqrt(std::max(rad(r), 0.0));
  };
  return integrate_adaptive(f, a, b, tol, 40);
}

}  // namespace

QuadResult integrate_singular(const SingularIntegralSpec& spec) {
  QuadResult out;
  if (!(spec.b > spec.a)) return out;
  if (spec.singular_a && spec.singular_b) {
    const double m = 0.5 * (spec.a + spec.b);
    QuadResult left =
        integrate_piece(spec, spec.a, m, true, false, 0.5 * spec.tol);
    QuadResult right =
        integrate_piece(spec, m, spec.b, false, true, 0.5 * spec.tol);
    out.value = left.value + right.value;
    out.error_estimate = left.error_estimate + right.error_estimate;
    out.converged = left.converged && right.converged;
    return out;
  }
  return integrate_piece(spec, spec.a, spec.b, spec.singular_a,
                         spec.singular_b, spec.tol);
}

double refine_root(const std::function<double(double)>& f, double lo, double hi) {
  double fa = f(lo), fb = f(hi);
  if (fa == 0.0) return lo;
  if (fb == 0.0) return hi;
  if (fa * fb > 0.0) throw std::invalid_argument("refine_root: no sign change");

  // Brent's method
  double a = lo, b = hi, c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 1e-300;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        double q1 = fa / fc, r1 = fb / fc;
        p = s * (2.0 * xm * q1 * (q1 - r1) - (b - a) * (r1 - 1.0));
        q = (q1 - 1.0) * (r1 - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
  }
  return b;
}

namespace {

// local max of g by golden-section on [lo, hi]
double maximize(const std::function<double(double)>& g, double lo, double hi) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = g(c), fd = g(d);
  for (int i = 0; i < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++i) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a); fc = g(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a); fd = g(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<Root> scan_roots(const std::function<double(double)>& f,
                             const std::function<double(double)>& res_scale,
                             ScanConfig scan, double r_ref, double dom_lo,
                             double dom_hi) {
  double lo = scan.r_lo > 0 ? scan.r_lo : 1e-6 * r_ref;
  double hi = scan.r_hi > 0 ? scan.r_hi : 1e6 * r_ref;
  lo = std::max(lo, dom_lo * (1.0 + 1e-12) + 1e-300);
  if (std::isfinite(dom_hi)) hi = std::min(hi, dom_hi * (1.0 - 1e-12));
  if (!(hi > lo)) return {};
  const int n = std::max(scan.nodes, 8);

  std::vector<double> rs(n + 1), fs(n + 1);
  const double ratio = std::log(hi / lo);
  for (int i = 0; i <= n; ++i) {
    rs[i] = lo * std::exp(ratio * double(i) / n);
    fs[i] = f(rs[i]);
  }

  std::vector<Root> roots;
  // a second root landing on top of an existing one is a degenerate pair
  // (rounding noise can split a double root into two crossings)
  auto push_root = [&](double r, int mult) {
    for (auto& q : roots)
      if (std::abs(q.r - r) <= 1e-9 * std::max(1.0, std::abs(r))) {
        q.multiplicity = 2;
        return;
      }
    roots.push_back({r, mult});
  };

  for (int i = 0; i < n; ++i) {
    if (fs[i] == 0.0) {
      push_root(rs[i], 1);
      continue;
    }
    if (fs[i] * fs[i + 1] < 0.0) {
      push_root(refine_root(f, rs[i], rs[i + 1]), 1);
      continue;
    }
    // local max of f that only touches zero: double root (no sign change)
    if (i > 0 && fs[i] < 0.0 && fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1]) {
      double rm = maximize(f, rs[i - 1], rs[i + 1]);
      double fm = f(rm);
      if (std::abs(fm) <= 1e-10 * res_scale(rm)) {
        push_root(rm, 2);
      } else if (fm > 0.0) {
        // grid missed a pair of simple roots
        push_root(refine_root(f, rs[i - 1], rm), 1);
        push_root(refine_root(f, rm, rs[i + 1]), 1);
      }
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const Root& x, const Root& y) { return x.r < y.r; });
  return roots;
}

double reference_radius(const Radicand& rad) {
  // inertial point sets the scan scale when one exists
  const auto& spec = rad.spec;
  auto g = [&spec](double r) { return spec.u_eff_prime(r); };
  double lo = std::max(1e-6, spec.potential.domain_lo() * (1 + 1e-9) + 1e-300);
  double hi = std::isfinite(spec.potential.domain_hi())
                  ? spec.potential.domain_hi() * (1 - 1e-9)
                  : 1e6;
  double prev_r = lo, prev = g(lo);
  const int n = 128;
  for (int i = 1; i <= n; ++i) {
    double r = lo * std::pow(hi / lo, double(i) / n);
    double cur = g(r);
    if (prev * cur < 0.0)
      return refine_root([&spec](double x) { return spec.u_eff_prime(x); },
                         prev_r, r);
    prev_r = r;
    prev = cur;
  }
  return 1.0;
}

}  // namespace

std::vector<Root> find_turning_points(const Radicand& rad, ScanConfig scan) {
  auto f = [&rad](double r) { return rad(r); };
  auto sc = [&rad](double r) { return rad.scale(r); };
  return scan_roots(f, sc, scan, reference_radius(rad),
                    rad.spec.potential.domain_lo(),
                    rad.spec.potential.domain_hi());
}

std::vector<Root> find_inertial_points(const Radicand& rad, ScanConfig scan) {
  const auto& spec = rad.spec;
  // effective force equation L^2 r^-3 - U'(r) = 0, i.e. -U_eff'(r) = 0
  auto f = [&spec](double r) { return -spec.u_eff_prime(r); };
  auto sc = [&spec](double r) {
    return 1.0 + spec.L * spec.L / (r * r * r) +
           std::abs(spec.potential.derivative(r));
  };
  return scan_roots(f, sc, scan, reference_radius(rad),
                    spec.potential.domain_lo(), spec.potential.domain_hi());
}

}  // namespace cfdyn
