#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cfdyn/integrals.hpp"
#include "cfdyn/oracles.hpp"

using namespace cfdyn;

namespace {
constexpr double kPi = 3.14159265358979323846;
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
}
}  // namespace

TEST_CASE("angular momentum is omega r^2") {
  CHECK(angular_momentum({0, 1, 0, 0, 1}) == 1.0);
  CHECK(angular_momentum({0, 2, 0, 0, 0.25}) == 1.0);
  CHECK(angular_momentum({0, 3, 0, 0.4, 0}) == 0.0);
}

TEST_CASE("energy values") {
  auto spec = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  CHECK(energy({0, 1, 0, 0, 1}, spec) == doctest::Approx(-0.5).epsilon(1e-14));

  double rmin = 2.0 - std::sqrt(2.0);
  PolarState tp{0, rmin, 0, 0, 1.0 / (rmin * rmin)};
  CHECK(energy(tp, spec) == doctest::Approx(-0.25).epsilon(1e-12));

  // static solution at a finite equilibrium has E = 0
  CustomSpec cs;
  cs.value = [](double r) { return 0.5 * (r - 2.0) * (r - 2.0); };
  cs.derivative = [](double r) { return r - 2.0; };
  auto p = RadialPotential::custom(cs);
  auto spec2 = make_effective_spec(p, 0.0);
  CHECK(energy({0, 2.0, 0.3, 0, 0}, spec2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("Theta at the reference point is the state's angle") {
  auto spec = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  double rmin = 2.0 - std::sqrt(2.0);
  PolarState s = state_on_shell(spec, -0.25, rmin, 0, 0.4, 1.234);
  auto ref = resolve_reference(s, spec.potential, RefKind::turning_min, 0.0);
  REQUIRE(ref.has_value());
  CHECK(theta_integral(s, spec, *ref) == doctest::Approx(1.234).epsilon(1e-12));
  CHECK(time_integral(s, spec, *ref) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("Theta at the inertial point of the Kepler ellipse") {
  // state r = 1, v = +sqrt(0.5), omega = 1 on k=1: L=1, E=-0.25; the
  // periapsis-referenced Theta is theta - pi/2
  auto spec = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  PolarState s{0.0, 1.0, 0.7, std::sqrt(0.5), 1.0};
  auto ref = resolve_reference(s, spec.potential, RefKind::turning_min, 0.0);
  REQUIRE(ref.has_value());
  CHECK(theta_integral(s, spec, *ref) ==
        doctest::Approx(0.7 - kPi / 2).epsilon(1e-10));

  auto rip = resolve_reference(s, spec.potential, RefKind::inertial, 0.0);
  REQUIRE(rip.has_value());
  CHECK(rip->r0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(theta_integral(s, spec, *rip) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("radial states: Theta is the line angle for any reference") {
  auto spec = make_effective_spec(RadialPotential::kepler(1.0), 0.0);
  PolarState s{0.2, 1.7, 2.5, -0.4, 0.0};
  ReferencePoint dummy{RefKind::turning_min, 0.9, 0};
  CHECK(theta_integral(s, spec, dummy) == 2.5);
  ReferencePoint dummy2{RefKind::inertial, 2.4, 0};
  CHECK(theta_integral(s, spec, dummy2) == 2.5);
}

TEST_CASE("circular solutions have no Theta/T") {
  auto spec = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  PolarState s{0, 1, 0, 0, 1};  // E = E_min: circular
  auto fis = first_integrals(s, spec, RefKind::turning_min);
  CHECK(!fis.Theta.has_value());
  CHECK(!fis.T.has_value());
  CHECK(fis.branch_note.find("circular") != std::string::npos);
}

TEST_CASE("quadrature matches the closed forms on random on-shell states") {
  std::mt19937_64 rng(31415);
  for (int trial = 0; trial < 60; ++trial) {
    double kappa = (trial % 2) ? 0.19 : 0.0;
    auto p = kappa > 0 ? RadialPotential::perturbed(1.0, kappa)
                       : RadialPotential::kepler(1.0);
    double L = uniform(rng, 0.8, 1.4);
    double emin = -0.5 / (L * L - kappa);
    double E = uniform(rng, 0.9 * emin, 0.45);
    auto spec = make_effective_spec(p, L);
    OracleParams par;
    par.kappa = kappa;
    par.L = L;
    par.E = E;
    auto sp = special_points(par);
    double rlo = sp.turning.front() * 1.01;
    double rhi = sp.turning.size() > 1 ? sp.turning.back() * 0.99
                                       : sp.turning.front() * 4.0;
    PolarState s = state_on_shell(spec, E, uniform(rng, rlo, rhi),
                                  trial % 3 == 0 ? -1 : +1,
                                  uniform(rng, -2, 2), uniform(rng, 0, 6));
    for (RefKind rk : {RefKind::turning_min, RefKind::inertial}) {
      par.branch = rk;
      auto ref = resolve_reference(s, p, rk, 0.0);
      REQUIRE(ref.has_value());
      double thq = theta_integral(s, spec, *ref, 1e-12);
      double tq = time_integral(s, spec, *ref, 1e-12);
      double thc = kappa > 0 ? newton_theta_closed(s, par)
                             : kepler_theta_closed(s, par);
      double tc = kappa > 0 ? newton_time_closed(s, par)
                            : kepler_time_closed(s, par);
      CHECK(std::abs(thq - thc) <= 1e-8);
      CHECK(std::abs(tq - tc) <= 1e-8);
    }
  }
}

TEST_CASE("apsidal angle: Kepler closes, the cubic correction precesses") {
  auto kep = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  auto a = apsidal_angle(kep, -0.25, 1e-12);
  CHECK(a.value == doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(a.closed);
  CHECK(a.p == 1);
  CHECK(a.q == 1);

  auto per = make_effective_spec(RadialPotential::perturbed(1.0, 0.19), 1.0);
  auto ap = apsidal_angle(per, -0.25, 1e-12);
  CHECK(ap.value == doctest::Approx(2 * kPi / 0.9).epsilon(1e-10));
  CHECK(ap.value == doctest::Approx(6.9813170).epsilon(1e-7));
  // sqrt(L^2 - kappa) = 0.9 exactly: a 10:9 rosette
  CHECK(ap.closed);
  CHECK(ap.p == 10);
  CHECK(ap.q == 9);

  // generic kappa: irrational ratio, reported open
  auto open_spec = make_effective_spec(RadialPotential::perturbed(1.0, 0.2), 1.0);
  CHECK(!apsidal_angle(open_spec, -0.25, 1e-12).closed);
}

TEST_CASE("apsidal angle is continuous in kappa at the Kepler point") {
  double prev = 2 * kPi / std::sqrt(1.0 - 0.1) + 1e-12;
  for (double kappa : {0.1, 0.01, 0.001, 1e-6}) {
    auto spec = make_effective_spec(RadialPotential::perturbed(1.0, kappa), 1.0);
    double val = apsidal_angle(spec, -0.25, 1e-12).value;
    CHECK(val == doctest::Approx(2 * kPi / std::sqrt(1 - kappa)).epsilon(1e-10));
    CHECK(val <= prev);
    CHECK(val >= 2 * kPi);
    prev = val;
  }
}

TEST_CASE("radial period values and L-independence") {
  auto kep = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  double expected = kPi / std::sqrt(2.0 * std::pow(0.25, 3));
  CHECK(radial_period(kep, -0.25, 1e-12) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(radial_period(kep, -0.25, 1e-12) ==
        doctest::Approx(17.7715318).epsilon(1e-8));

  auto per = make_effective_spec(RadialPotential::perturbed(1.0, 0.19), 1.0);
  CHECK(radial_period(per, -0.25, 1e-12) ==
        doctest::Approx(expected).epsilon(1e-12));

  for (double L : {0.8, 1.0, 1.3}) {
    auto s1 = make_effective_spec(RadialPotential::kepler(1.0), L);
    CHECK(radial_period(s1, -0.25, 1e-12) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("apsidal quantities reject non-bounded inputs") {
  auto kep = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  CHECK_THROWS_AS(apsidal_angle(kep, 0.1, 1e-10), std::domain_error);
  CHECK_THROWS_AS(radial_period(kep, -0.5, 1e-10), std::domain_error);
}

TEST_CASE("shape curve endpoints and the conic oracle") {
  auto spec = make_effective_spec(RadialPotential::kepler(1.0), 1.0);
  const double E = -0.25;
  double rmin = 2.0 - std::sqrt(2.0), rmax = 2.0 + std::sqrt(2.0);
  ReferencePoint ref{RefKind::turning_min, rmin, 0};
  const double Theta = 0.55;

  auto ends = shape_curve(spec, E, Theta, ref, {rmin, rmax}, +1, 1e-12);
  REQUIRE(ends.size() == 2);
  CHECK(ends[0].ok);
  CHECK(ends[0].theta == doctest::Approx(Theta).epsilon(1e-10));
  CHECK(ends[1].theta == doctest::Approx(Theta + kPi).epsilon(1e-10));

  // against r(theta) = L^2 / (k + sqrt(k^2 - 2|E|L^2) cos(Theta - theta))
  std::mt19937_64 rng(5);
  std::vector<double> rs;
  for (int i = 0; i < 40; ++i)
    rs.push_back(uniform(rng, rmin * 1.001, rmax * 0.999));
  auto samples = shape_curve(spec, E, Theta, ref, rs, +1, 1e-12);
  for (const auto& cs : samples) {
    REQUIRE(cs.ok);
    double r_conic = 1.0 / (1.0 + std::sqrt(0.5) * std::cos(Theta - cs.theta));
    CHECK(std::abs(cs.r - r_conic) <= 1e-6);
  }

  // out-of-domain samples come back marked, not thrown
  auto bad = shape_curve(spec, E, Theta, ref, {0.1, 10.0}, +1, 1e-12);
  CHECK(!bad[0].ok);
  CHECK(!bad[1].ok);
}

TEST_CASE("rational multiple detection") {
  long p = 0, q = 0;
  CHECK(rational_multiple(10.0 / 9.0, 64, 1e-9, &p, &q));
  CHECK(p == 10);
  CHECK(q == 9);
  CHECK(!rational_multiple(std::sqrt(2.0), 64, 1e-9, &p, &q));
}

TEST_CASE("conservation residual of a constant evaluator is zero") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  PolarState s0 = state_on_shell(spec, -0.25, 2.0 - std::sqrt(2.0), 0);
  Trajectory traj = integrate_polar(pot, s0, 40.0, 1e-10);
  auto rep = conservation_residual([](const PolarState&) { return 42.0; }, traj,
                                   true);
  CHECK(rep.max_drift == 0.0);
  for (double j : rep.jumps) CHECK(j == 0.0);
}

TEST_CASE("L and E conserved, Theta/T piecewise constant with the right jumps") {
  auto pot = RadialPotential::perturbed(1.0, 0.19);
  auto spec = make_effective_spec(pot, 1.0);
  const double E = -0.25;
  double period = radial_period(spec, E, 1e-12);
  double dtheta = apsidal_angle(spec, E, 1e-12).value;
  auto tps = find_turning_points(Radicand{spec, E});
  PolarState s0 = state_on_shell(spec, E, tps.front().r, 0);
  Trajectory traj = integrate_polar(pot, s0, 3.0 * period, 1e-11);

  auto rep_L = conservation_residual(
      [](const PolarState& s) { return angular_momentum(s); }, traj);
  auto rep_E = conservation_residual(
      [&spec](const PolarState& s) { return energy(s, spec); }, traj);
  CHECK(rep_L.max_drift <= 1e-8);
  CHECK(rep_E.max_drift <= 1e-8 * 0.25);

  auto theta_eval = [&](const PolarState& s) {
    auto ref = resolve_reference(s, pot, RefKind::turning_min, 0.0);
    return theta_integral(s, spec, *ref, 1e-12);
  };
  // with the periapsis reference, Theta/T are continuous at periapsis
  // crossings and jump by the apsidal separations at each apoapsis
  auto rep_th = conservation_residual(theta_eval, traj, true);
  CHECK(rep_th.max_drift <= 1e-6);
  REQUIRE(!rep_th.jumps.empty());
  for (std::size_t i = 0; i < rep_th.jumps.size(); ++i) {
    double expect =
        rep_th.jump_kinds[i] == Event::Kind::apoapsis ? dtheta : 0.0;
    CHECK(std::abs(std::abs(rep_th.jumps[i]) - expect) <= 1e-6);
  }
  CHECK(std::abs(rep_th.jumps.front()) ==
        doctest::Approx(6.9813170).epsilon(1e-6));

  auto t_eval = [&](const PolarState& s) {
    auto ref = resolve_reference(s, pot, RefKind::turning_min, 0.0);
    return time_integral(s, spec, *ref, 1e-12);
  };
  auto rep_t = conservation_residual(t_eval, traj, true);
  CHECK(rep_t.max_drift <= 1e-6);
  for (std::size_t i = 0; i < rep_t.jumps.size(); ++i) {
    double expect =
        rep_t.jump_kinds[i] == Event::Kind::apoapsis ? period : 0.0;
    CHECK(std::abs(std::abs(rep_t.jumps[i]) - expect) <= 1e-6);
  }
}
