// cfdyn: central-force first integrals and hidden-symmetry toolkit CLI
#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "cfdyn/geometry.hpp"
#include "cfdyn/integrals.hpp"
#include "cfdyn/jsonio.hpp"
#include "cfdyn/oracles.hpp"
#include "cfdyn/symmetry.hpp"

#include "verify.hpp"

using json = nlohmann::json;
using namespace cfdyn;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  RadialPotential potential = RadialPotential::kepler(1.0);
  std::optional<PolarState> polar;
  std::optional<CartesianState> cartesian;
  double t_end = 10.0;
  double ode_tol = 1e-10;
  double quad_tol = 1e-10;
  std::string ref = "auto";
  std::uint64_t seed = 20240817;
};

RadialPotential parse_potential(const json& j) {
  if (!j.contains("kind")) throw ConfigError("potential: missing field 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  double k = j.value("k", 1.0);
  if (kind == "kepler") return RadialPotential::kepler(k);
  if (kind == "perturbed") {
    if (!j.contains("kappa"))
      throw ConfigError("potential: perturbed kind needs field 'kappa'");
    return RadialPotential::perturbed(k, j.at("kappa").get<double>());
  }
  if (kind == "power") {
    if (!j.contains("p"))
      throw ConfigError("potential: power kind needs field 'p'");
    return RadialPotential::power_law(k, j.at("p").get<double>());
  }
  throw ConfigError("potential: unknown kind '" + kind + "'");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  if (!j.contains("potential")) throw ConfigError("missing field 'potential'");
  cfg.potential = parse_potential(j.at("potential"));

  if (j.contains("state")) {
    const json& st = j.at("state");
    if (st.contains("polar") && st.contains("cartesian"))
      throw ConfigError("state: exactly one of polar/cartesian allowed");
    if (st.contains("polar")) {
      const json& p = st.at("polar");
      PolarState s;
      s.t = p.value("t", 0.0);
      s.r = p.at("r").get<double>();
      s.theta = p.value("theta", 0.0);
      s.v = p.value("v", 0.0);
      s.omega = p.value("omega", 0.0);
      cfg.polar = s;
    } else if (st.contains("cartesian")) {
      const json& c = st.at("cartesian");
      CartesianState s;
      s.t = c.value("t", 0.0);
      s.r = c.at("r").get<std::vector<double>>();
      s.v = c.at("v").get<std::vector<double>>();
      if (s.r.size() != s.v.size())
        throw ConfigError("state.cartesian: r and v dimension mismatch");
      cfg.cartesian = s;
    } else {
      throw ConfigError("state: needs 'polar' or 'cartesian'");
    }
  }
  cfg.t_end = j.value("t_end", cfg.t_end);
  cfg.ode_tol = j.value("ode_tol", cfg.ode_tol);
  cfg.quad_tol = j.value("quad_tol", cfg.quad_tol);
  cfg.ref = j.value("ref", cfg.ref);
  cfg.seed = j.value("seed", cfg.seed);
  if (cfg.ode_tol <= 0.0 || cfg.quad_tol <= 0.0)
    throw ConfigError("tolerances must be positive");
  return cfg;
}

RefKind ref_kind_of(const std::string& name, const RadialPotential& p,
                    const PolarState& s) {
  if (name == "turning-min") return RefKind::turning_min;
  if (name == "turning-max") return RefKind::turning_max;
  if (name == "inertial") return RefKind::inertial;
  if (name != "auto") throw ConfigError("unknown ref policy '" + name + "'");
  // auto: periapsis when one exists, inertial otherwise
  double u_eq = equilibrium_point(p).u_eq;
  if (resolve_reference(s, p, RefKind::turning_min, u_eq))
    return RefKind::turning_min;
  return RefKind::inertial;
}

PolarState initial_polar(const RunConfig& cfg) {
  if (cfg.polar) return *cfg.polar;
  if (cfg.cartesian) return reduce_to_plane(*cfg.cartesian).second;
  throw ConfigError("config needs an initial state");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

JsonValue ref_json(const ReferencePoint& ref) {
  JsonValue v = JsonValue::object();
  switch (ref.kind) {
    case RefKind::turning_min: v.set("kind", "turning_min"); break;
    case RefKind::turning_max: v.set("kind", "turning_max"); break;
    case RefKind::inertial: v.set("kind", "inertial"); break;
  }
  v.set("r0", ref.r0);
  return v;
}

JsonValue integral_set_json(const FirstIntegralSet& fis) {
  JsonValue v = JsonValue::object();
  v.set("L", fis.L);
  v.set("E", fis.E);
  v.set("Theta", fis.Theta ? JsonValue(*fis.Theta) : JsonValue());
  v.set("T", fis.T ? JsonValue(*fis.T) : JsonValue());
  if (fis.Theta) {
    double wrapped = std::fmod(std::fmod(*fis.Theta, 2 * kPi) + 2 * kPi, 2 * kPi);
    v.set("Theta_mod_2pi", wrapped);
  }
  v.set("ref", fis.ref ? ref_json(*fis.ref) : JsonValue());
  v.set("sgn_v", fis.sgn_v);
  v.set("branch_note", fis.branch_note);
  return v;
}

std::string csv_line(const PolarState& s) {
  return format_shortest(s.t) + "," + format_shortest(s.r) + "," +
         format_shortest(s.theta) + "," + format_shortest(s.v) + "," +
         format_shortest(s.omega);
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_prefix) {
  PolarState s0 = initial_polar(cfg);
  EffectivePotentialSpec spec =
      make_effective_spec(cfg.potential, angular_momentum(s0));
  double E = energy(s0, spec);
  Classification cls = classify_trajectory(spec, E);
  if (cls.kind == TrajectoryClass::circular)
    std::cerr << "warning: circular: Theta/T undefined\n";
  if (cls.kind == TrajectoryClass::forbidden) {
    std::cerr << "error: no trajectory exists at this (L, E)\n";
    return kExitCheckFailure;
  }

  std::vector<double> watch;
  for (const auto& ip : find_inertial_points(Radicand{spec, E}))
    watch.push_back(ip.r);

  Trajectory traj =
      integrate_polar(cfg.potential, s0, cfg.t_end, cfg.ode_tol, watch);

  std::string csv = "t,r,theta,v,omega\n";
  for (const auto& s : traj.states) csv += csv_line(s) + "\n";
  write_file(out_prefix + ".csv", csv);

  JsonValue events = JsonValue::array();
  for (const auto& ev : traj.events) {
    JsonValue e = JsonValue::object();
    e.set("t", ev.t);
    switch (ev.kind) {
      case Event::Kind::periapsis: e.set("kind", "periapsis"); break;
      case Event::Kind::apoapsis: e.set("kind", "apoapsis"); break;
      case Event::Kind::inertial_crossing: e.set("kind", "inertial_crossing"); break;
    }
    e.set("r", ev.state.r);
    e.set("theta", ev.state.theta);
    events.push(std::move(e));
  }
  JsonValue sidecar = JsonValue::object();
  sidecar.set("events", std::move(events));
  write_file(out_prefix + "_events.json", sidecar.dump(2) + "\n");

  if (traj.collision) {
    std::cerr << "error: trajectory reached the collision radius (partial "
                 "output written)\n";
    return kExitCheckFailure;
  }
  if (!traj.failure.empty()) {
    std::cerr << "error: " << traj.failure << "\n";
    return kExitCheckFailure;
  }
  return 0;
}

int cmd_integrals(const RunConfig& cfg, std::optional<double> at_time,
                  const std::string& ref_name, const std::string& out_path) {
  PolarState s = initial_polar(cfg);
  if (at_time) {
    Trajectory traj =
        integrate_polar(cfg.potential, s, *at_time, cfg.ode_tol, {});
    if (traj.collision || !traj.failure.empty()) {
      std::cerr << "error: could not integrate to requested time\n";
      return kExitCheckFailure;
    }
    s = traj.state_at(*at_time);
  }
  EffectivePotentialSpec spec =
      make_effective_spec(cfg.potential, angular_momentum(s));
  FirstIntegralSet fis;
  if (angular_momentum(s) == 0.0) {
    fis.L = 0.0;
    fis.E = energy(s, spec);
    fis.Theta = s.theta;
    fis.branch_note = "radial";
  } else {
    RefKind ref = ref_kind_of(ref_name, cfg.potential, s);
    fis = first_integrals(s, spec, ref, cfg.quad_tol);
  }
  JsonValue v = integral_set_json(fis);
  if (fis.branch_note == "radial") v.set("note", "radial");
  std::string text = v.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  return fis.Theta || fis.branch_note == "radial" ? 0 : kExitCheckFailure;
}

int cmd_classify(const RunConfig& cfg, const std::string& out_path) {
  PolarState s = initial_polar(cfg);
  EffectivePotentialSpec spec =
      make_effective_spec(cfg.potential, angular_momentum(s));
  double E = energy(s, spec);
  Classification cls = classify_trajectory(spec, E);
  JsonValue v = JsonValue::object();
  v.set("class", to_string(cls.kind));
  v.set("L", spec.L);
  v.set("E", E);
  v.set("E_min", cls.E_min ? JsonValue(*cls.E_min) : JsonValue());
  v.set("turning_count", cls.turning_count);
  std::string text = v.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  bool bad = cls.kind == TrajectoryClass::no_bounded_trajectories ||
             cls.kind == TrajectoryClass::forbidden;
  if (bad) std::cerr << "error: " << to_string(cls.kind) << "\n";
  return bad ? kExitCheckFailure : 0;
}

int cmd_precession(const std::string& kind, double k, double kappa, double pexp,
                   double L, double E, double quad_tol,
                   const std::string& out_path) {
  RadialPotential pot = RadialPotential::kepler(k);
  if (kind == "perturbed") {
    if (kappa >= L * L) {
      std::cerr << "error: no bounded trajectories (kappa >= L^2)\n";
      return kExitCheckFailure;
    }
    pot = RadialPotential::perturbed(k, kappa);
  } else if (kind == "power") {
    pot = RadialPotential::power_law(k, pexp);
  } else if (kind != "kepler") {
    std::cerr << "error: unknown potential kind '" << kind << "'\n";
    return kExitConfigError;
  }
  EffectivePotentialSpec spec = make_effective_spec(pot, L);
  try {
    ApsidalAngle ang = apsidal_angle(spec, E, quad_tol);
    double dt = radial_period(spec, E, quad_tol);
    JsonValue v = JsonValue::object();
    v.set("delta_theta", ang.value);
    v.set("delta_theta_mod_2pi", ang.mod_2pi);
    v.set("delta_t", dt);
    v.set("closed", ang.closed);
    if (ang.closed) {
      v.set("p", ang.p);
      v.set("q", ang.q);
      v.set("verdict", "closed");
    } else {
      v.set("verdict", "open (within numerical precision)");
    }
    std::string text = v.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
    return 0;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
}

int cmd_lrl(const RunConfig& cfg, std::optional<double> at_time,
            const std::string& ref_name, int ndim, const std::string& out_path) {
  CartesianState s;
  if (cfg.cartesian) {
    s = *cfg.cartesian;
    if (at_time) {
      NdimTrajectory traj =
          integrate_ndim(cfg.potential, s, *at_time, cfg.ode_tol, {});
      s = traj.state_at(*at_time);
    }
  } else {
    PolarState pol = initial_polar(cfg);
    if (at_time) {
      Trajectory traj =
          integrate_polar(cfg.potential, pol, *at_time, cfg.ode_tol, {});
      pol = traj.state_at(*at_time);
    }
    // polar states embed into the first two axes of R^n (--n, default 2)
    int n = std::max(ndim, 2);
    if (n > 8) throw ConfigError("--n must be in 2..8");
    PlaneFrame frame;
    frame.e1.assign(n, 0.0);
    frame.e2.assign(n, 0.0);
    frame.e1[0] = 1.0;
    frame.e2[1] = 1.0;
    s = embed_to_ndim(frame, pol);
  }

  auto [frame, pol] = reduce_to_plane(s);
  EffectivePotentialSpec spec =
      make_effective_spec(cfg.potential, angular_momentum(pol));
  Classification cls = classify_trajectory(spec, energy(pol, spec));
  if (cls.kind == TrajectoryClass::circular) {
    std::cerr << "error: undefined for circular\n";
    return kExitCheckFailure;
  }

  RefKind ref = ref_kind_of(ref_name, cfg.potential, pol);
  try {
    Bivector b = bivector_from_state(s);
    DirectionResult lrl = lrl_vector(s, cfg.potential, ref, std::nullopt,
                                     cfg.quad_tol);
    auto variant = lrl_variant(s, cfg.potential, std::nullopt, cfg.quad_tol);

    JsonValue v = JsonValue::object();
    v.set("n", s.dim());
    JsonValue comps = JsonValue::array();
    for (int i = 0; i < s.dim(); ++i)
      for (int j = i + 1; j < s.dim(); ++j) {
        JsonValue entry = JsonValue::array();
        entry.push(i);
        entry.push(j);
        entry.push(b.component(i, j));
        comps.push(std::move(entry));
      }
    v.set("L_components", std::move(comps));
    auto vec_json = [](const std::vector<double>& x) {
      JsonValue arr = JsonValue::array();
      for (double xi : x) arr.push(xi);
      return arr;
    };
    v.set("theta_hat", vec_json(lrl.theta_hat));
    v.set("theta_hat_perp", vec_json(lrl.theta_hat_perp));
    v.set("A", vec_json(lrl.A));
    v.set("norm", lrl.normalization);
    v.set("A_variant", variant ? vec_json(variant->A) : JsonValue());
    v.set("ref", ref_json(lrl.ref));
    std::string text = v.dump(2) + "\n";
    if (out_path.empty())
      std::cout << text;
    else
      write_file(out_path, text);
    return 0;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"central-force first integrals, LRL geometry, and hidden-symmetry verification"};
  app.require_subcommand(1);
  app.fallthrough();  // shared flags may follow the subcommand name

  std::string config_path, out_path, ref_name = "auto";
  double ode_tol_flag = 0.0, quad_tol_flag = 0.0;
  int ndim_flag = 0;
  app.add_option("--config", config_path, "JSON run configuration")
      ->envname("CFDYN_CONFIG");
  app.add_option("--out", out_path, "output path (prefix for simulate)");
  app.add_option("--ode-tol", ode_tol_flag, "override ODE tolerance");
  app.add_option("--quad-tol", quad_tol_flag, "override quadrature tolerance");
  app.add_option("--ref", ref_name,
                 "reference point policy: auto|turning-min|turning-max|inertial");
  app.add_option("--n", ndim_flag, "dimension override for embeddings");

  auto* sim = app.add_subcommand("simulate", "integrate and write CSV + events");
  auto* ints = app.add_subcommand("integrals", "evaluate L, E, Theta, T");
  auto* cls = app.add_subcommand("classify", "trajectory classification");
  auto* prec = app.add_subcommand("precession", "apsidal angle and radial period");
  auto* lrl = app.add_subcommand("lrl", "LRL vector and bivector geometry");
  auto* ver = app.add_subcommand("verify", "run a verification suite");

  std::optional<double> at_time;
  double at_val = 0.0;
  bool have_at = false;
  ints->add_option("--at-time", at_val, "evaluate at this time");
  ints->callback([&] { have_at = ints->count("--at-time") > 0; });
  lrl->add_option("--at-time", at_val, "evaluate at this time");
  lrl->callback([&] { have_at = lrl->count("--at-time") > 0; });

  std::string prec_kind = "kepler";
  double prec_k = 1.0, prec_kappa = 0.0, prec_p = 1.0, prec_L = 1.0,
         prec_E = -0.25;
  prec->add_option("--kind", prec_kind, "kepler|perturbed|power");
  prec->add_option("--k", prec_k, "force strength");
  prec->add_option("--kappa", prec_kappa, "cubic correction strength");
  prec->add_option("--p", prec_p, "power-law exponent");
  prec->add_option("--L", prec_L, "angular momentum");
  prec->add_option("--E", prec_E, "energy");

  std::string suite = "conservation";
  ver->add_option("--suite", suite,
                  "conservation|oracle|symmetry|geometry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prec->parsed()) {
      double qt = quad_tol_flag > 0.0 ? quad_tol_flag : 1e-10;
      return cmd_precession(prec_kind, prec_k, prec_kappa, prec_p, prec_L,
                            prec_E, qt, out_path);
    }

    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    else if (!ver->parsed())
      throw ConfigError("--config is required for this command");
    if (ode_tol_flag > 0.0) cfg.ode_tol = ode_tol_flag;
    if (quad_tol_flag > 0.0) cfg.quad_tol = quad_tol_flag;
    if (have_at) at_time = at_val;

    if (sim->parsed()) {
      std::string prefix = out_path.empty() ? "trajectory" : out_path;
      return cmd_simulate(cfg, prefix);
    }
    if (ints->parsed()) return cmd_integrals(cfg, at_time, ref_name, out_path);
    if (cls->parsed()) return cmd_classify(cfg, out_path);
    if (lrl->parsed()) return cmd_lrl(cfg, at_time, ref_name, ndim_flag, out_path);
    if (ver->parsed()) {
      VerifyOptions opts;
      opts.ode_tol = cfg.ode_tol;
      opts.quad_tol = cfg.quad_tol;
      opts.seed = cfg.seed;
      VerifyReport rep = run_verify_suite(suite, opts);
      std::string text = rep.json.dump(2) + "\n";
      if (out_path.empty())
        std::cout << text;
      else
        write_file(out_path, text);
      return rep.all_passed ? 0 : kExitCheckFailure;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return 0;
}
