#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cfdyn/geometry.hpp"
#include "cfdyn/oracles.hpp"

using namespace cfdyn;

namespace {
constexpr double kPi = 3.14159265358979323846;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
}

double norm(const std::vector<double>& x) {
  double s = 0;
  for (double xi : x) s += xi * xi;
  return std::sqrt(s);
}

// random bounded state for kepler(k = 1), rotated into general position
CartesianState random_bound_state(std::mt19937_64& rng, int n) {
  CartesianState s;
  s.t = uniform(rng, -1, 1);
  s.r.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.r[0] = uniform(rng, 0.9, 1.8);
  s.v[0] = uniform(rng, -0.3, 0.3);
  s.v[1] = uniform(rng, 0.55, 0.85);
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i + 1 < n; ++i) {
      double ang = uniform(rng, 0, 2 * kPi);
      double c = std::cos(ang), sn = std::sin(ang);
      auto rot = [&](std::vector<double>& x) {
        double xi = x[i], xj = x[i + 1];
        x[i] = c * xi - sn * xj;
        x[i + 1] = sn * xi + c * xj;
      };
      rot(s.r);
      rot(s.v);
    }
  return s;
}
}  // namespace

TEST_CASE("bivector components") {
  CartesianState a;
  a.r = {1.0, 0.0};
  a.v = {0.0, 1.0};
  Bivector b = bivector_from_state(a);
  CHECK(b.component(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.scalar == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.norm() * b.norm() == doctest::Approx(2.0).epsilon(1e-12));

  CartesianState c;
  c.r = {2.0, 0.0, 0.0};
  c.v = {0.3, 0.4, 0.0};
  Bivector b3 = bivector_from_state(c);
  CHECK(b3.component(0, 1) == doctest::Approx(0.8).epsilon(1e-13));
  CHECK(b3.component(0, 2) == doctest::Approx(0.0));
  CHECK(b3.component(1, 2) == doctest::Approx(0.0));

  CartesianState col;
  col.r = {1.0, 1.0, 0.0};
  col.v = {0.5, 0.5, 0.0};
  CHECK(bivector_from_state(col).scalar == doctest::Approx(0.0));
}

TEST_CASE("bivector equals the componentwise wedge r_i v_j - r_j v_i") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    CartesianState s = random_bound_state(rng, 5);
    Bivector b = bivector_from_state(s);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(std::abs(b.component(i, j) -
                       (s.r[i] * s.v[j] - s.r[j] * s.v[i])) <= 1e-12);
  }
}

TEST_CASE("unit bivector contraction algebra") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    CartesianState s = random_bound_state(rng, 4);
    auto [frame, pol] = reduce_to_plane(s);
    Bivector unit;
    unit.frame = frame;
    unit.scalar = 1.0;
    // rhat . Lhat = theta_hat_dir, theta_hat_dir . Lhat = -rhat, Lhat . Lhat = 2
    auto th = unit.contract(frame.e1);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(th[i] - frame.e2[i]) <= 1e-12);
    auto mr = unit.contract(frame.e2);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(mr[i] + frame.e1[i]) <= 1e-12);
    CHECK(unit.dot(unit) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("theta_hat at the periapsis points along the radial line") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  double rmin = 2.0 - std::sqrt(2.0);
  PolarState pol = state_on_shell(spec, -0.25, rmin, 0, 0.0, 0.0);
  PlaneFrame fr;
  fr.e1 = {std::cos(0.8), std::sin(0.8), 0.0};
  fr.e2 = {-std::sin(0.8), std::cos(0.8), 0.0};
  CartesianState s = embed_to_ndim(fr, pol);
  auto res = theta_hat(s, pot, RefKind::turning_min, 1e-12);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(res.theta_hat[i] - s.r[i] / rmin) <= 1e-9);
}

TEST_CASE("theta_hat matches the closed Kepler direction vector") {
  // Theta-hat(tp_min) = -((k/r) rvec + vvec . L) / sqrt(2EL^2 + k^2)
  auto pot = RadialPotential::kepler(1.0);
  std::mt19937_64 rng(29);
  for (int n : {2, 3, 5}) {
    for (int trial = 0; trial < 20; ++trial) {
      CartesianState s = random_bound_state(rng, n);
      Bivector b = bivector_from_state(s);
      auto [frame, pol] = reduce_to_plane(s);
      auto spec = make_effective_spec(pot, angular_momentum(pol));
      double E = energy(pol, spec);
      double L = angular_momentum(pol);
      auto res = theta_hat(s, pot, RefKind::turning_min, 1e-13);
      auto vdotL = b.contract(s.v);
      double den = std::sqrt(2 * E * L * L + 1.0);
      for (int i = 0; i < n; ++i) {
        double expect = -((1.0 / pol.r) * s.r[i] + vdotL[i]) / den;
        CHECK(std::abs(res.theta_hat[i] - expect) <= 1e-8);
      }
    }
  }
}

TEST_CASE("theta_hat agrees with the polar Theta through the frame") {
  auto pot = RadialPotential::perturbed(1.0, 0.19);
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    CartesianState s = random_bound_state(rng, 3);
    auto [frame, pol] = reduce_to_plane(s);
    auto spec = make_effective_spec(pot, angular_momentum(pol));
    for (RefKind rk : {RefKind::turning_min, RefKind::turning_max,
                       RefKind::inertial}) {
      auto ref = resolve_reference(pol, pot, rk, 0.0);
      REQUIRE(ref.has_value());
      double Theta = theta_integral(pol, spec, *ref, 1e-13);
      auto res = theta_hat(s, pot, rk, 1e-13);
      for (int i = 0; i < 3; ++i) {
        double expect =
            std::cos(Theta) * frame.e1[i] + std::sin(Theta) * frame.e2[i];
        CHECK(std::abs(res.theta_hat[i] - expect) <= 1e-8);
      }
    }
  }
}

TEST_CASE("theta_hat is constant along an integrated arc") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  PolarState pol0 = state_on_shell(spec, -0.25, 1.0, +1);
  PlaneFrame fr;
  fr.e1 = {1.0, 0.0};
  fr.e2 = {0.0, 1.0};
  CartesianState s0 = embed_to_ndim(fr, pol0);
  NdimTrajectory traj = integrate_ndim(pot, s0, 4.0, 1e-11);
  auto first = theta_hat(traj.states.front(), pot, RefKind::turning_min, 1e-12);
  for (std::size_t i = 1; i < traj.states.size(); ++i) {
    auto cur = theta_hat(traj.states[i], pot, RefKind::turning_min, 1e-12);
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(cur.theta_hat[c] - first.theta_hat[c]) <= 1e-6);
  }
}

TEST_CASE("perp vector: orientation, involution, orthogonality") {
  CartesianState a;
  a.r = {1.0, 0.0};
  a.v = {0.0, 1.0};
  Bivector b = bivector_from_state(a);
  std::vector<double> e1{1.0, 0.0};
  auto perp = theta_hat_perp(e1, b);
  CHECK(perp[0] == doctest::Approx(0.0));
  CHECK(perp[1] == doctest::Approx(1.0));
  auto perp2 = theta_hat_perp(perp, b);
  CHECK(perp2[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(perp2[1] == doctest::Approx(0.0));

  std::mt19937_64 rng(51);
  auto pot = RadialPotential::kepler(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    CartesianState s = random_bound_state(rng, 3);
    auto res = theta_hat(s, pot, RefKind::turning_min, 1e-12);
    double dot = 0;
    for (int i = 0; i < 3; ++i) dot += res.theta_hat[i] * res.theta_hat_perp[i];
    CHECK(std::abs(dot) <= 1e-12);
    CHECK(std::abs(norm(res.theta_hat_perp) - 1.0) <= 1e-10);
  }
}

TEST_CASE("LRL vector: Kepler magnitude and in-plane invariants") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  PolarState pol = state_on_shell(spec, -0.25, 1.57, -1, 0.1, 0.9);
  PlaneFrame fr;
  fr.e1 = {1.0, 0.0};
  fr.e2 = {0.0, 1.0};
  CartesianState s = embed_to_ndim(fr, pol);

  auto lrl = lrl_vector(s, pot, RefKind::turning_min, std::nullopt, 1e-13);
  CHECK(norm(lrl.A) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));

  Bivector b = bivector_from_state(s);
  auto vdotL = b.contract(s.v);
  for (int i = 0; i < 2; ++i) {
    double expect = -((1.0 / pol.r) * s.r[i] + vdotL[i]);
    CHECK(std::abs(lrl.A[i] - expect) <= 1e-9);
  }

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    CartesianState q = random_bound_state(rng, 5);
    Bivector bq = bivector_from_state(q);
    auto res = lrl_vector(q, pot, RefKind::turning_min, std::nullopt, 1e-12);
    CHECK(bq.wedge_norm(res.A) <= 1e-10);
  }
}

TEST_CASE("LRL vector near an apsis falls back to the direct form") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  double rmin = 2.0 - std::sqrt(2.0);
  PolarState pol = state_on_shell(spec, -0.25, rmin * (1.0 + 1e-12), +1);
  PlaneFrame fr;
  fr.e1 = {1.0, 0.0};
  fr.e2 = {0.0, 1.0};
  auto lrl = lrl_vector(embed_to_ndim(fr, pol), pot, RefKind::turning_min,
                        std::nullopt, 1e-12);
  CHECK(norm(lrl.A) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
  CHECK(lrl.A[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
}

TEST_CASE("variant vector: rotation identity and sign flip at periapsis") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  PlaneFrame fr;
  fr.e1 = {1.0, 0.0};
  fr.e2 = {0.0, 1.0};

  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    double r = uniform(rng, 0.6, 3.3);
    int sv = trial % 2 ? +1 : -1;
    PolarState pol = state_on_shell(spec, -0.25, r, sv, 0, uniform(rng, 0, 6));
    CartesianState s = embed_to_ndim(fr, pol);
    auto var = lrl_variant(s, pot, std::nullopt, 1e-13);
    REQUIRE(var.has_value());
    auto tp = lrl_vector(s, pot, RefKind::turning_min, std::nullopt, 1e-13);
    Bivector unit = bivector_from_state(s);
    unit.scalar = 1.0;
    auto rotated = unit.contract(tp.A);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(rotated[i] - sv * var->A[i]) <= 1e-8);
  }

  // just before vs just after periapsis: the variant flips sign
  double rmin = 2.0 - std::sqrt(2.0);
  double r_near = rmin * (1.0 + 1e-14);
  PolarState before = state_on_shell(spec, -0.25, r_near, -1);
  PolarState after = state_on_shell(spec, -0.25, r_near, +1);
  auto vb = lrl_variant(embed_to_ndim(fr, before), pot, std::nullopt, 1e-12);
  auto va = lrl_variant(embed_to_ndim(fr, after), pot, std::nullopt, 1e-12);
  REQUIRE(vb.has_value());
  REQUIRE(va.has_value());
  for (int i = 0; i < 2; ++i) CHECK(std::abs(vb->A[i] + va->A[i]) <= 1e-6);
}

TEST_CASE("perturbed variant is the turning vector rotated by the half angle") {
  auto pot = RadialPotential::perturbed(1.0, 0.19);
  auto spec = make_effective_spec(pot, 1.0);
  PlaneFrame fr;
  fr.e1 = {1.0, 0.0};
  fr.e2 = {0.0, 1.0};
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 20; ++trial) {
    double r = uniform(rng, 0.55, 3.3);
    int sv = trial % 2 ? +1 : -1;
    PolarState pol = state_on_shell(spec, -0.25, r, sv, 0, uniform(rng, 0, 6));
    CartesianState s = embed_to_ndim(fr, pol);
    auto var = lrl_variant(s, pot, std::nullopt, 1e-13);
    auto tp = lrl_vector(s, pot, RefKind::turning_min, std::nullopt, 1e-13);
    REQUIRE(var.has_value());
    // in-plane rotation angle sgn(v) (L/sqrt(L^2-kappa)) pi/2
    double ang = sv * (1.0 / 0.9) * kPi / 2.0;
    double c = std::cos(ang), sn = std::sin(ang);
    double ax = c * tp.A[0] - sn * tp.A[1];
    double ay = sn * tp.A[0] + c * tp.A[1];
    CHECK(std::abs(var->A[0] - ax) <= 1e-6);
    CHECK(std::abs(var->A[1] - ay) <= 1e-6);
  }
}

TEST_CASE("temporal quantity matches the polar route and the closed form") {
  auto pot = RadialPotential::kepler(1.0);
  auto spec = make_effective_spec(pot, 1.0);
  PlaneFrame fr;
  fr.e1 = {0.0, 1.0, 0.0};
  fr.e2 = {0.0, 0.0, 1.0};
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 25; ++trial) {
    double r = uniform(rng, 0.65, 3.3);
    int sv = trial % 2 ? +1 : -1;
    PolarState pol =
        state_on_shell(spec, -0.25, r, sv, uniform(rng, -2, 2), uniform(rng, 0, 6));
    CartesianState s = embed_to_ndim(fr, pol);
    double Tn = temporal_ndim(s, pot, RefKind::turning_min, 1e-13);
    auto ref = resolve_reference(pol, pot, RefKind::turning_min, 0.0);
    double Tp = time_integral(pol, spec, *ref, 1e-13);
    CHECK(std::abs(Tn - Tp) <= 1e-10);

    OracleParams par;
    par.L = 1.0;
    par.E = -0.25;
    CHECK(std::abs(Tn - kepler_time_closed(pol, par)) <= 1e-8);
  }

  // at the reference point, T is the state's time
  double rmin = 2.0 - std::sqrt(2.0);
  PolarState tp = state_on_shell(spec, -0.25, rmin, 0, 0.77);
  CartesianState s = embed_to_ndim(fr, tp);
  CHECK(temporal_ndim(s, pot, RefKind::turning_min, 1e-12) ==
        doctest::Approx(0.77).epsilon(1e-10));
}

TEST_CASE("independent-quantity counts and Jacobian ranks") {
  auto pot = RadialPotential::kepler(1.0);
  auto r3 = count_independent(3, pot, 1234);
  CHECK(r3.bivector_components == 3);
  CHECK(r3.bivector_independent == 3);
  CHECK(r3.theta_hat_independent == 2);
  CHECK(r3.joint_geometric == 4);
  CHECK(r3.total_independent == 6);
  CHECK(r3.jacobian_rank == 6);

  auto r2 = count_independent(2, pot, 1234);
  CHECK(r2.bivector_components == 1);
  CHECK(r2.bivector_independent == 1);
  CHECK(r2.theta_hat_independent == 1);
  CHECK(r2.total_independent == 4);
  CHECK(r2.jacobian_rank == 4);
}

TEST_CASE("the LRL vector rotates by the apsidal angle across an apsis") {
  auto pot = RadialPotential::perturbed(1.0, 0.19);
  auto spec = make_effective_spec(pot, 1.0);
  const double E = -0.25;
  double dtheta = apsidal_angle(spec, E, 1e-12).value;
  PlaneFrame fr;
  fr.e1 = {1.0, 0.0};
  fr.e2 = {0.0, 1.0};
  auto tps = find_turning_points(Radicand{spec, E});
  double r_apo = tps.back().r * (1.0 - 1e-14);
  // the same radius approached outward (before the apoapsis) and inward
  PolarState before = state_on_shell(spec, E, r_apo, +1, 0.0, 1.0);
  PolarState after = state_on_shell(spec, E, r_apo, -1, 0.0, 1.0);
  auto a_before = lrl_vector(embed_to_ndim(fr, before), pot,
                             RefKind::turning_min, std::nullopt, 1e-13);
  auto a_after = lrl_vector(embed_to_ndim(fr, after), pot,
                            RefKind::turning_min, std::nullopt, 1e-13);
  double ang_before = std::atan2(a_before.A[1], a_before.A[0]);
  double ang_after = std::atan2(a_after.A[1], a_after.A[0]);
  double jump = ang_after - ang_before;
  double expect = std::fmod(dtheta, 2 * kPi);
  double wrapped = std::fmod(std::fmod(jump, 2 * kPi) + 2 * kPi, 2 * kPi);
  CHECK(std::abs(wrapped - expect) <= 1e-6);

  // within one arc the components stay put
  Trajectory traj = integrate_polar(pot, state_on_shell(spec, E, 1.2, +1),
                                    4.0, 1e-11);
  auto first = lrl_vector(embed_to_ndim(fr, traj.states.front()), pot,
                          RefKind::turning_min, std::nullopt, 1e-12);
  for (std::size_t i = 1; i < traj.states.size(); i += 4) {
    if (traj.states[i].v <= 0) break;
    auto cur = lrl_vector(embed_to_ndim(fr, traj.states[i]), pot,
                          RefKind::turning_min, std::nullopt, 1e-12);
    for (int c = 0; c < 2; ++c)
      CHECK(std::abs(cur.A[c] - first.A[c]) <= 1e-6);
  }
}
