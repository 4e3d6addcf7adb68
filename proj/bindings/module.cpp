#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfdyn/geometry.hpp"
#include "cfdyn/integrals.hpp"
#include "cfdyn/oracles.hpp"
#include "cfdyn/symmetry.hpp"

namespace py = pybind11;
using namespace cfdyn;

namespace {

RadialPotential make_potential(const std::string& kind, double k, double kappa,
                               double p) {
  if (kind == "kepler") return RadialPotential::kepler(k);
  if (kind == "perturbed") return RadialPotential::perturbed(k, kappa);
  if (kind == "power") return RadialPotential::power_law(k, p);
  throw std::invalid_argument("unknown potential kind '" + kind + "'");
}

RefKind ref_of(const std::string& name) {
  if (name == "turning_min") return RefKind::turning_min;
  if (name == "turning_max") return RefKind::turning_max;
  if (name == "inertial") return RefKind::inertial;
  throw std::invalid_argument("unknown reference kind '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "central-force dynamics: complete first-integral set, "
            "generalized LRL vectors, and hidden-symmetry checks";

  py::class_<RadialPotential>(m, "RadialPotential")
      .def_static("kepler", &RadialPotential::kepler, py::arg("k"))
      .def_static("perturbed", &RadialPotential::perturbed, py::arg("k"),
                  py::arg("kappa"))
      .def_static("power_law", &RadialPotential::power_law, py::arg("k"),
                  py::arg("p"))
      .def("value", &RadialPotential::value)
      .def("derivative", &RadialPotential::derivative)
      .def("force", &RadialPotential::force)
      .def("eval", &RadialPotential::eval);
  m.def("potential", &make_potential, py::arg("kind"), py::arg("k") = 1.0,
        py::arg("kappa") = 0.0, py::arg("p") = 1.0);

  py::class_<PolarState>(m, "PolarState")
      .def(py::init([](double t, double r, double theta, double v, double omega) {
             return PolarState{t, r, theta, v, omega};
           }),
           py::arg("t") = 0.0, py::arg("r") = 1.0, py::arg("theta") = 0.0,
           py::arg("v") = 0.0, py::arg("omega") = 0.0)
      .def_readwrite("t", &PolarState::t)
      .def_readwrite("r", &PolarState::r)
      .def_readwrite("theta", &PolarState::theta)
      .def_readwrite("v", &PolarState::v)
      .def_readwrite("omega", &PolarState::omega)
      .def("__repr__", [](const PolarState& s) {
        return "PolarState(t=" + std::to_string(s.t) + ", r=" +
               std::to_string(s.r) + ", theta=" + std::to_string(s.theta) +
               ", v=" + std::to_string(s.v) + ", omega=" +
               std::to_string(s.omega) + ")";
      });

  py::class_<CartesianState>(m, "CartesianState")
      .def(py::init([](double t, std::vector<double> r, std::vector<double> v) {
             CartesianState s;
             s.t = t;
             s.r = std::move(r);
             s.v = std::move(v);
             return s;
           }),
           py::arg("t"), py::arg("r"), py::arg("v"))
      .def_readwrite("t", &CartesianState::t)
      .def_readwrite("r", &CartesianState::r)
      .def_readwrite("v", &CartesianState::v)
      .def("dim", &CartesianState::dim);

  m.def("classify",
        [](const RadialPotential& p, double L, double E) {
          auto cls = classify_trajectory(make_effective_spec(p, L), E);
          py::dict d;
          d["class"] = to_string(cls.kind);
          d["turning_count"] = cls.turning_count;
          if (cls.E_min) d["E_min"] = *cls.E_min;
          return d;
        },
        py::arg("potential"), py::arg("L"), py::arg("E"));

  m.def("turning_points",
        [](const RadialPotential& p, double L, double E) {
          std::vector<std::pair<double, int>> out;
          for (auto& r :
               find_turning_points(Radicand{make_effective_spec(p, L), E}))
            out.emplace_back(r.r, r.multiplicity);
          return out;
        },
        py::arg("potential"), py::arg("L"), py::arg("E"));

  m.def("inertial_points",
        [](const RadialPotential& p, double L) {
          std::vector<double> out;
          for (auto& r :
               find_inertial_points(Radicand{make_effective_spec(p, L), 0.0}))
            out.push_back(r.r);
          return out;
        },
        py::arg("potential"), py::arg("L"));

  m.def("angular_momentum", &angular_momentum);
  m.def("energy",
        [](const PolarState& s, const RadialPotential& p) {
          return energy(s, make_effective_spec(p, angular_momentum(s)));
        },
        py::arg("state"), py::arg("potential"));

  m.def("first_integrals",
        [](const PolarState& s, const RadialPotential& p,
           const std::string& ref, double tol) {
          auto spec = make_effective_spec(p, angular_momentum(s));
          FirstIntegralSet fis = first_integrals(s, spec, ref_of(ref), tol);
          py::dict d;
          d["L"] = fis.L;
          d["E"] = fis.E;
          d["Theta"] = fis.Theta ? py::object(py::float_(*fis.Theta))
                                 : py::object(py::none());
          d["T"] = fis.T ? py::object(py::float_(*fis.T))
                         : py::object(py::none());
          d["sgn_v"] = fis.sgn_v;
          d["branch_note"] = fis.branch_note;
          if (fis.ref) d["r0"] = fis.ref->r0;
          return d;
        },
        py::arg("state"), py::arg("potential"), py::arg("ref") = "turning_min",
        py::arg("tol") = 1e-10);

  m.def("apsidal_angle",
        [](const RadialPotential& p, double L, double E, double tol) {
          auto a = apsidal_angle(make_effective_spec(p, L), E, tol);
          py::dict d;
          d["delta_theta"] = a.value;
          d["mod_2pi"] = a.mod_2pi;
          d["closed"] = a.closed;
          if (a.closed) {
            d["p"] = a.p;
            d["q"] = a.q;
          }
          return d;
        },
        py::arg("potential"), py::arg("L"), py::arg("E"),
        py::arg("tol") = 1e-10);

  m.def("radial_period",
        [](const RadialPotential& p, double L, double E, double tol) {
          return radial_period(make_effective_spec(p, L), E, tol);
        },
        py::arg("potential"), py::arg("L"), py::arg("E"),
        py::arg("tol") = 1e-10);

  m.def("simulate",
        [](const RadialPotential& p, const PolarState& s0, double t_end,
           double tol) {
          Trajectory traj = integrate_polar(p, s0, t_end, tol);
          py::dict d;
          py::list states;
          for (auto& s : traj.states) states.append(s);
          py::list events;
          for (auto& ev : traj.events) {
            py::dict e;
            e["t"] = ev.t;
            e["kind"] = ev.kind == Event::Kind::periapsis   ? "periapsis"
                        : ev.kind == Event::Kind::apoapsis ? "apoapsis"
                                                           : "inertial_crossing";
            e["r"] = ev.state.r;
            e["theta"] = ev.state.theta;
            events.append(e);
          }
          d["states"] = states;
          d["events"] = events;
          d["collision"] = traj.collision;
          d["steps"] = traj.stats.steps;
          return d;
        },
        py::arg("potential"), py::arg("state"), py::arg("t_end"),
        py::arg("tol") = 1e-10);

  m.def("reduce_to_plane", [](const CartesianState& s) {
    auto [frame, pol] = reduce_to_plane(s);
    py::dict d;
    d["e1"] = frame.e1;
    d["e2"] = frame.e2;
    d["polar"] = pol;
    return d;
  });
  m.def("embed_to_ndim",
        [](const std::vector<double>& e1, const std::vector<double>& e2,
           const PolarState& s) {
          PlaneFrame f;
          f.e1 = e1;
          f.e2 = e2;
          return embed_to_ndim(f, s);
        },
        py::arg("e1"), py::arg("e2"), py::arg("state"));

  m.def("bivector",
        [](const CartesianState& s) {
          Bivector b = bivector_from_state(s);
          const int n = s.dim();
          py::list comps;
          for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
              py::tuple t = py::make_tuple(i, j, b.component(i, j));
              comps.append(t);
            }
          py::dict d;
          d["scalar"] = b.scalar;
          d["norm"] = b.norm();
          d["components"] = comps;
          return d;
        });

  m.def("theta_hat",
        [](const CartesianState& s, const RadialPotential& p,
           const std::string& ref, double tol) {
          auto r = theta_hat(s, p, ref_of(ref), tol);
          py::dict d;
          d["theta_hat"] = r.theta_hat;
          d["theta_hat_perp"] = r.theta_hat_perp;
          d["r0"] = r.ref.r0;
          return d;
        },
        py::arg("state"), py::arg("potential"), py::arg("ref") = "turning_min",
        py::arg("tol") = 1e-12);

  m.def("lrl_vector",
        [](const CartesianState& s, const RadialPotential& p,
           const std::string& ref, py::object normalization, double tol) {
          std::optional<double> norm;
          if (!normalization.is_none()) norm = normalization.cast<double>();
          auto r = lrl_vector(s, p, ref_of(ref), norm, tol);
          py::dict d;
          d["A"] = r.A;
          d["theta_hat"] = r.theta_hat;
          d["norm"] = r.normalization;
          return d;
        },
        py::arg("state"), py::arg("potential"), py::arg("ref") = "turning_min",
        py::arg("normalization") = py::none(), py::arg("tol") = 1e-12);

  m.def("lrl_variant",
        [](const CartesianState& s, const RadialPotential& p, double tol)
            -> py::object {
          auto r = lrl_variant(s, p, std::nullopt, tol);
          if (!r) return py::none();
          py::dict d;
          d["A"] = r->A;
          d["norm"] = r->normalization;
          return d;
        },
        py::arg("state"), py::arg("potential"), py::arg("tol") = 1e-12);

  m.def("temporal_ndim",
        [](const CartesianState& s, const RadialPotential& p,
           const std::string& ref, double tol) {
          return temporal_ndim(s, p, ref_of(ref), tol);
        },
        py::arg("state"), py::arg("potential"), py::arg("ref") = "turning_min",
        py::arg("tol") = 1e-12);

  m.def("count_independent",
        [](int n, const RadialPotential& p, std::uint64_t seed) {
          auto rep = count_independent(n, p, seed);
          py::dict d;
          d["bivector_components"] = rep.bivector_components;
          d["bivector_independent"] = rep.bivector_independent;
          d["theta_hat_independent"] = rep.theta_hat_independent;
          d["joint_geometric"] = rep.joint_geometric;
          d["total_independent"] = rep.total_independent;
          d["jacobian_rank"] = rep.jacobian_rank;
          return d;
        },
        py::arg("n"), py::arg("potential"), py::arg("seed") = 1234);

  m.def("action_on_integrals",
        [](const std::string& gen, const PolarState& s,
           const RadialPotential& p, const std::string& ref) {
          Generator g = gen == "X_L"       ? Generator::X_L
                        : gen == "X_E"     ? Generator::X_E
                        : gen == "X_Theta" ? Generator::X_Theta
                                           : Generator::X_T;
          auto row = action_on_integrals(g, s, p, ref_of(ref));
          return std::vector<double>(row.begin(), row.end());
        },
        py::arg("generator"), py::arg("state"), py::arg("potential"),
        py::arg("ref") = "turning_min");

  // closed-form oracles
  py::class_<OracleParams>(m, "OracleParams")
      .def(py::init([](double k, double kappa, double L, double E,
                       const std::string& branch, int sgn_v) {
             OracleParams par;
             par.k = k;
             par.kappa = kappa;
             par.L = L;
             par.E = E;
             par.branch = ref_of(branch);
             par.sgn_v = sgn_v;
             return par;
           }),
           py::arg("k") = 1.0, py::arg("kappa") = 0.0, py::arg("L") = 1.0,
           py::arg("E") = -0.25, py::arg("branch") = "turning_min",
           py::arg("sgn_v") = 1);
  m.def("kepler_theta_closed", &kepler_theta_closed);
  m.def("kepler_time_closed", &kepler_time_closed);
  m.def("kepler_shape", &kepler_shape);
  m.def("newton_theta_closed", &newton_theta_closed);
  m.def("newton_time_closed", &newton_time_closed);
  m.def("newton_shape", &newton_shape);
  m.def("special_points", [](const OracleParams& par) {
    auto sp = special_points(par);
    py::dict d;
    d["turning"] = sp.turning;
    d["E_min"] = sp.E_min;
    if (sp.inertial) d["inertial"] = *sp.inertial;
    if (sp.v_star) d["v_star"] = *sp.v_star;
    return d;
  });
}
