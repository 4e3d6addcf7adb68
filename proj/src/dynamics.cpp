#include "cfdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfdyn {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output coefficients
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

using Vec = std::vector<double>;
using Deriv = std::function<void(double, const Vec&, Vec&)>;

struct StepResult {
  Vec y_new;
  Vec k_new;  // derivative at the new point (FSAL)
  double error = 0.0;
  DenseSegment dense;
};

StepResult dopri_step(const Deriv& f, double t, const Vec& y, const Vec& k1,
                      double h, double atol, double rtol) {
  const std::size_t n = y.size();
  Vec tmp(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_new(n);

  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  f(t + c2 * h, tmp, k2);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  f(t + c3 * h, tmp, k3);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  f(t + c4 * h, tmp, k4);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  f(t + c5 * h, tmp, k5);
  for (std::size_t i = 0; i < n; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                         a64 * k4[i] + a65 * k5[i]);
  f(t + h, tmp, k6);
  for (std::size_t i = 0; i < n; ++i)
    y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                           b6 * k6[i]);
  f(t + h, y_new, k7);

  StepResult res;
  res.y_new = y_new;
  res.k_new = k7;
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                     e6 * k6[i] + e7 * k7[i]);
    double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
    err += (ei / sc) * (ei / sc);
  }
  res.error = std::sqrt(err / double(n));

  res.dense.t0 = t;
  res.dense.h = h;
  res.dense.cont.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ydiff = y_new[i] - y[i];
    double bspl = h * k1[i] - ydiff;
    res.dense.cont[i] = {
        y[i], ydiff, bspl, ydiff - h * k7[i] - bspl,
        h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
             d7 * k7[i])};
  }
  return res;
}

double dense_eval(const DenseSegment& seg, std::size_t i, double t) {
  const double th = (t - seg.t0) / seg.h;
  const double th1 = 1.0 - th;
  const auto& c = seg.cont[i];
  return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
}

struct RawTrajectory {
  std::vector<double> times;
  std::vector<Vec> ys;
  DenseOutput dense;
  IntegratorStats stats;
  bool collision = false;
  std::string failure;
};

// generic driver; stop(r) lets the caller abort on collision
RawTrajectory integrate(const Deriv& f, double t0, Vec y0, double t_end,
                        double tol, const std::function<double(const Vec&)>& radius) {
  if (tol < 1e-13) throw std::invalid_argument("tolerance below 1e-13");
  RawTrajectory out;
  out.stats.tol = tol;
  // per-step budget sized so drift accumulated over tens of radial
  // periods stays within the requested tolerance
  const double step_tol = 0.02 * tol;
  const double dir = (t_end >= t0) ? 1.0 : -1.0;
  const double r_initial = radius(y0);

  double t = t0;
  Vec y = y0;
  Vec k1(y.size());
  f(t, y, k1);
  out.times.push_back(t);
  out.ys.push_back(y);

  double h = dir * std::min(1e-2, std::abs(t_end - t0));
  const double h_min = 1e-14 * std::max(1.0, std::abs(t_end - t0));

  while (dir * (t_end - t) > 0.0) {
    if (dir * (t + h) > dir * t_end) h = t_end - t;
    StepResult step;
    try {
      step = dopri_step(f, t, y, k1, h, step_tol, step_tol);
    } catch (const std::exception&) {
      // trial state left the force domain: treat like a failed step
      step.error = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(step.error)) {
      h *= 0.25;
      ++out.stats.rejected;
      if (std::abs(h) < h_min) {
        out.failure = "step size underflow (non-finite error estimate)";
        break;
      }
      continue;
    }
    if (step.error > 1.0) {
      ++out.stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(step.error, -0.2));
      if (std::abs(h) < h_min) {
        out.failure = "step size underflow";
        break;
      }
      continue;
    }
    // accepted
    out.dense.push(step.dense);
    t += h;
    y = step.y_new;
    k1 = step.k_new;
    ++out.stats.steps;
    out.times.push_back(t);
    out.ys.push_back(y);
    if (radius(y) < 1e-9 * r_initial) {
      out.collision = true;  // partial trajectory with collision flag
      break;
    }
    double fac = 0.9 * std::pow(std::max(step.error, 1e-10), -0.2);
    h *= std::clamp(fac, 0.2, 10.0);
  }
  return out;
}

// bisect g(t) = 0 on the dense output to 1e-12 in time
double bisect_time(const DenseOutput& dense, double t_lo, double t_hi,
                   const std::function<double(const Vec&)>& g) {
  double g_lo = g(dense.at(t_lo));
  for (int i = 0; i < 200 && (t_hi - t_lo) > 1e-12; ++i) {
    double tm = 0.5 * (t_lo + t_hi);
    double gm = g(dense.at(tm));
    if ((gm > 0) == (g_lo > 0)) {
      t_lo = tm;
      g_lo = gm;
    } else {
      t_hi = tm;
    }
  }
  return 0.5 * (t_lo + t_hi);
}

}  // namespace

std::vector<double> DenseOutput::at(double t) const {
  const DenseSegment& seg = segment_for(t);
  std::vector<double> y(seg.cont.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = dense_eval(seg, i, t);
  return y;
}

const DenseSegment& DenseOutput::segment_for(double t) const {
  if (segments_.empty()) throw std::runtime_error("empty dense output");
  const bool forward = segments_.front().h > 0;
  auto cmp = [forward](const DenseSegment& s, double tv) {
    return forward ? (s.t0 + s.h < tv) : (s.t0 + s.h > tv);
  };
  auto it = std::lower_bound(segments_.begin(), segments_.end(), t, cmp);
  if (it == segments_.end()) it = std::prev(segments_.end());
  return *it;
}

double DenseOutput::t_front() const { return segments_.front().t0; }
double DenseOutput::t_back() const {
  return segments_.back().t0 + segments_.back().h;
}

PolarState Trajectory::state_at(double t) const {
  std::vector<double> y = dense.at(t);
  return PolarState{t, y[0], y[1], y[2], y[3]};
}

CartesianState NdimTrajectory::state_at(double t) const {
  std::vector<double> y = dense.at(t);
  const int n = int(y.size()) / 2;
  CartesianState s;
  s.t = t;
  s.r.assign(y.begin(), y.begin() + n);
  s.v.assign(y.begin() + n, y.end());
  return s;
}

Trajectory integrate_polar(const RadialPotential& p, const PolarState& s0,
                           double t_end, double tol,
                           const std::vector<double>& watch_radii) {
  if (!(s0.r > 0.0)) throw std::invalid_argument("initial radius must be positive");

  // y = (r, theta, v, omega)
  Deriv f = [&p](double, const Vec& y, Vec& dy) {
    const double r = y[0], v = y[2], om = y[3];
    dy.resize(4);
    dy[0] = v;
    dy[1] = om;
    dy[2] = om * om * r - p.derivative(r);
    dy[3] = -2.0 * om * v / r;
  };
  auto radius = [](const Vec& y) { return y[0]; };

  RawTrajectory raw = integrate(f, s0.t, {s0.r, s0.theta, s0.v, s0.omega},
                                t_end, tol, radius);

  Trajectory out;
  out.stats = raw.stats;
  out.collision = raw.collision;
  out.failure = raw.failure;
  if (!raw.failure.empty() && raw.times.size() < 2)
    throw std::runtime_error("integration failed: " + raw.failure);
  out.states.reserve(raw.times.size());
  for (std::size_t i = 0; i < raw.times.size(); ++i)
    out.states.push_back(PolarState{raw.times[i], raw.ys[i][0], raw.ys[i][1],
                                    raw.ys[i][2], raw.ys[i][3]});

  // events: sign changes of v (apsides), r crossing watch radii
  for (std::size_t i = 0; i + 1 < raw.times.size(); ++i) {
    const Vec& ya = raw.ys[i];
    const Vec& yb = raw.ys[i + 1];
    if (ya[2] != 0.0 && ya[2] * yb[2] < 0.0) {
      double te = bisect_time(raw.dense, raw.times[i], raw.times[i + 1],
                              [](const Vec& y) { return y[2]; });
      Vec ye = raw.dense.at(te);
      Event ev;
      ev.kind = (ya[2] < 0.0) ? Event::Kind::periapsis : Event::Kind::apoapsis;
      ev.t = te;
      ev.state = PolarState{te, ye[0], ye[1], ye[2], ye[3]};
      out.events.push_back(ev);
    }
    for (double rw : watch_radii) {
      if ((ya[0] - rw) * (yb[0] - rw) < 0.0) {
        double te = bisect_time(raw.dense, raw.times[i], raw.times[i + 1],
                                [rw](const Vec& y) { return y[0] - rw; });
        Vec ye = raw.dense.at(te);
        out.events.push_back(
            {Event::Kind::inertial_crossing, te,
             PolarState{te, ye[0], ye[1], ye[2], ye[3]}});
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });
  out.dense = std::move(raw.dense);
  return out;
}

NdimTrajectory integrate_ndim(const RadialPotential& p, const CartesianState& s0,
                              double t_end, double tol,
                              const std::vector<double>& watch_radii) {
  const int n = s0.dim();
  if (n < 2 || n > 8) throw std::invalid_argument("dimension must be in 2..8");
  if (int(s0.v.size()) != n)
    throw std::invalid_argument("position/velocity dimension mismatch");

  Deriv f = [&p, n](double, const Vec& y, Vec& dy) {
    dy.resize(2 * n);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += y[i] * y[i];
    const double r = std::sqrt(r2);
    const double lam = -p.derivative(r) / r;  // F(r)/r
    for (int i = 0; i < n; ++i) {
      dy[i] = y[n + i];
      dy[n + i] = lam * y[i];
    }
  };
  auto radius = [n](const Vec& y) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += y[i] * y[i];
    return std::sqrt(r2);
  };
  auto vdotr = [n](const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += y[i] * y[n + i];
    return s;
  };

  Vec y0(2 * n);
  std::copy(s0.r.begin(), s0.r.end(), y0.begin());
  std::copy(s0.v.begin(), s0.v.end(), y0.begin() + n);
  RawTrajectory raw = integrate(f, s0.t, y0, t_end, tol, radius);

  NdimTrajectory out;
  out.stats = raw.stats;
  out.collision = raw.collision;
  out.failure = raw.failure;
  out.states.reserve(raw.times.size());
  for (std::size_t i = 0; i < raw.times.size(); ++i) {
    CartesianState cs;
    cs.t = raw.times[i];
    cs.r.assign(raw.ys[i].begin(), raw.ys[i].begin() + n);
    cs.v.assign(raw.ys[i].begin() + n, raw.ys[i].end());
    out.states.push_back(std::move(cs));
  }
  auto polar_of = [&](double te, const Vec& ye) {
    CartesianState cs;
    cs.t = te;
    cs.r.assign(ye.begin(), ye.begin() + n);
    cs.v.assign(ye.begin() + n, ye.end());
    auto [frame, pol] = reduce_to_plane(cs);
    return pol;
  };
  for (std::size_t i = 0; i + 1 < raw.times.size(); ++i) {
    double sa = vdotr(raw.ys[i]), sb = vdotr(raw.ys[i + 1]);
    if (sa != 0.0 && sa * sb < 0.0) {
      double te = bisect_time(raw.dense, raw.times[i], raw.times[i + 1], vdotr);
      Vec ye = raw.dense.at(te);
      out.events.push_back({sa < 0.0 ? Event::Kind::periapsis
                                     : Event::Kind::apoapsis,
                            te, polar_of(te, ye)});
    }
    for (double rw : watch_radii) {
      double ra = radius(raw.ys[i]) - rw, rb = radius(raw.ys[i + 1]) - rw;
      if (ra * rb < 0.0) {
        double te = bisect_time(raw.dense, raw.times[i], raw.times[i + 1],
                                [&](const Vec& y) { return radius(y) - rw; });
        out.events.push_back({Event::Kind::inertial_crossing, te,
                              polar_of(te, raw.dense.at(te))});
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });
  out.dense = std::move(raw.dense);
  return out;
}

std::pair<PlaneFrame, PolarState> reduce_to_plane(const CartesianState& s) {
  const int n = s.dim();
  double r2 = 0.0;
  for (double x : s.r) r2 += x * x;
  const double r = std::sqrt(r2);
  if (!(r > 0.0)) throw std::invalid_argument("zero position vector");

  PlaneFrame frame;
  frame.e1.resize(n);
  for (int i = 0; i < n; ++i) frame.e1[i] = s.r[i] / r;

  double vdotr = 0.0;
  for (int i = 0; i < n; ++i) vdotr += frame.e1[i] * s.v[i];
  std::vector<double> w(n);
  double w2 = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = s.v[i] - vdotr * frame.e1[i];
    w2 += w[i] * w[i];
  }
  double vmag2 = 0.0;
  for (double x : s.v) vmag2 += x * x;

  if (w2 > 1e-24 * std::max(1.0, vmag2)) {
    frame.e2.resize(n);
    const double wn = std::sqrt(w2);
    for (int i = 0; i < n; ++i) frame.e2[i] = w[i] / wn;
  } else {
    // collinear: complete with the first standard basis vector not
    // parallel to rhat
    frame.degenerate_completion = true;
    frame.e2.assign(n, 0.0);
    int pick = 0;
    double best = 1.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(frame.e1[i]) < best) {
        best = std::abs(frame.e1[i]);
        pick = i;
      }
    }
    std::vector<double> u(n, 0.0);
    u[pick] = 1.0;
    double udote = frame.e1[pick];
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      frame.e2[i] = u[i] - udote * frame.e1[i];
      norm2 += frame.e2[i] * frame.e2[i];
    }
    const double nn = std::sqrt(norm2);
    for (int i = 0; i < n; ++i) frame.e2[i] /= nn;
  }

  PolarState pol;
  pol.t = s.t;
  pol.r = r;
  pol.theta = 0.0;  // gauge: e1 points along the state's radial direction
  pol.v = vdotr;
  double vdote2 = 0.0;
  for (int i = 0; i < n; ++i) vdote2 += frame.e2[i] * s.v[i];
  pol.omega = vdote2 / r;
  return {frame, pol};
}

CartesianState embed_to_ndim(const PlaneFrame& frame, const PolarState& s) {
  const int n = frame.dim();
  double e11 = 0.0, e22 = 0.0, e12 = 0.0;
  for (int i = 0; i < n; ++i) {
    e11 += frame.e1[i] * frame.e1[i];
    e22 += frame.e2[i] * frame.e2[i];
    e12 += frame.e1[i] * frame.e2[i];
  }
  if (std::abs(e11 - 1.0) > 1e-12 || std::abs(e22 - 1.0) > 1e-12 ||
      std::abs(e12) > 1e-12)
    throw std::invalid_argument("frame is not orthonormal");

  CartesianState out;
  out.t = s.t;
  out.r.resize(n);
  out.v.resize(n);
  const double ct = std::cos(s.theta), st = std::sin(s.theta);
  for (int i = 0; i < n; ++i) {
    out.r[i] = s.r * (ct * frame.e1[i] + st * frame.e2[i]);
    out.v[i] = (s.v * ct - s.omega * s.r * st) * frame.e1[i] +
               (s.v * st + s.omega * s.r * ct) * frame.e2[i];
  }
  return out;
}

}  // namespace cfdyn
