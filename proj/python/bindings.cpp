#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "plap/config_io.hpp"
#include "plap/errors.hpp"

namespace py = pybind11;
using namespace plap;

// Python owns meshes through a mutable-pointer holder; the library only
// ever sees them as const.
using MeshH = std::shared_ptr<Mesh>;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

DiscreteFunction from_numpy(const MeshPtr& mesh, const std::vector<double>& v) {
  if (v.size() != mesh->num_vertices()) throw InvalidConfig("expected one value per vertex", "values");
  return DiscreteFunction(mesh, v);
}

Weight as_weight(const py::object& o) {
  if (py::isinstance<Weight>(o)) return o.cast<Weight>();
  if (py::isinstance<py::str>(o)) return Weight::expression(o.cast<std::string>());
  if (py::isinstance<py::float_>(o) || py::isinstance<py::int_>(o)) return Weight::constant(o.cast<double>());
  return Weight::nodal(o.cast<std::vector<double>>());
}

ProblemSpec make_spec(const MeshPtr& mesh, double p, double q, double lam, double eta, const py::object& m,
                      const py::object& a, const py::object& f) {
  ProblemSpec s;
  s.mesh = mesh;
  s.p = p, s.q = q, s.lam = lam, s.eta = eta;
  s.m = as_weight(m), s.a = as_weight(a), s.f = as_weight(f);
  s.validate();
  return s;
}

py::dict outcome_dict(const SolveOutcome& o) {
  py::dict d;
  d["start_strategy"] = o.start_strategy;
  d["converged"] = o.converged;
  d["resonant"] = o.resonant;
  d["sign_class"] = o.converged ? to_string(o.sign_class) : std::string("failed");
  d["residual_norm"] = o.residual_norm;
  d["energy"] = o.energy;
  d["sup_norm"] = o.sup_norm;
  d["u"] = to_numpy(o.u.values());
  d["message"] = o.message;
  return d;
}

}  // namespace

PYBIND11_MODULE(_plap, mod) {
  mod.doc() = "p-Laplacian sign-property toolkit";

  auto base = py::register_exception<Error>(mod, "PlapError", PyExc_RuntimeError);
  py::register_exception<InvalidConfig>(mod, "InvalidConfig", PyExc_ValueError);
  py::register_exception<ParseError>(mod, "ParseError", PyExc_ValueError);
  py::register_exception<NonConvergence>(mod, "NonConvergence", base.ptr());
  py::register_exception<IoError>(mod, "IoError", PyExc_OSError);

  py::class_<Mesh, MeshH>(mod, "Mesh")
      .def_property_readonly("dimension", &Mesh::dimension)
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def_property_readonly("x", [](const Mesh& m) {
        std::vector<double> x;
        for (const auto& p : m.vertices()) x.push_back(p.x);
        return to_numpy(x);
      })
      .def_property_readonly("y", [](const Mesh& m) {
        std::vector<double> y;
        for (const auto& p : m.vertices()) y.push_back(p.y);
        return to_numpy(y);
      })
      .def_property_readonly("interior_vertices", &Mesh::interior_vertices)
      .def_property_readonly("lumped_volumes", [](const Mesh& m) { return to_numpy(m.lumped_volumes()); });

  mod.def(
      "build_interval",
      [](double x0, double x1, int n) { return std::const_pointer_cast<Mesh>(build_interval(x0, x1, n)); },
      py::arg("x0"), py::arg("x1"), py::arg("n"));
  mod.def(
      "build_rectangle",
      [](double x0, double x1, double y0, double y1, int nx, int ny) {
        return std::const_pointer_cast<Mesh>(build_rectangle(x0, x1, y0, y1, nx, ny));
      },
      py::arg("x0"), py::arg("x1"), py::arg("y0"), py::arg("y1"), py::arg("nx"), py::arg("ny"));

  py::class_<Weight>(mod, "Weight")
      .def_static("constant", [](double c) { return Weight::constant(c); })
      .def_static("expression", [](const std::string& s) { return Weight::expression(s); })
      .def_static("nodal", [](std::vector<double> v) { return Weight::nodal(std::move(v)); })
      .def("evaluate", [](const Weight& w, const Mesh& m) { return to_numpy(w.evaluate(m)); })
      .def("__repr__", &Weight::describe);

  mod.def(
      "principal_eigenpair",
      [](const MeshH& mesh, const py::object& m, double p) {
        const auto e = principal_eigenpair(mesh, as_weight(m), p);
        py::dict d;
        d["lam"] = e.lam;
        d["phi"] = to_numpy(e.phi.values());
        d["iterations"] = e.iterations;
        d["residual"] = e.residual;
        return d;
      },
      py::arg("mesh"), py::arg("m") = 1.0, py::arg("p") = 2.0);

  mod.def("second_eigenvalue_1d", [](double x0, double x1, double p) {
    return dirichlet_eigenvalue_1d_shooting(x0, x1, p, 2);
  });

  mod.def(
      "solve",
      [](const MeshH& mesh, double p, double q, double lam, double eta, const py::object& m, const py::object& a,
         const py::object& f, std::uint64_t seed) {
        SolveOptions o;
        o.seed = seed;
        const auto res = multi_start_solve(make_spec(mesh, p, q, lam, eta, m, a, f), o);
        py::list out;
        for (const auto& s : res.starts) out.append(outcome_dict(s));
        return out;
      },
      py::arg("mesh"), py::arg("p") = 2.0, py::arg("q") = 1.5, py::arg("lam") = 0.0, py::arg("eta") = 0.0,
      py::arg("m") = 1.0, py::arg("a") = 1.0, py::arg("f") = 1.0, py::arg("seed") = 20240611);

  mod.def(
      "energy",
      [](const MeshH& mesh, const std::vector<double>& u, double p, double q, double lam, double eta,
         const py::object& m, const py::object& a, const py::object& f) {
        return energy(make_spec(mesh, p, q, lam, eta, m, a, f), from_numpy(mesh, u));
      },
      py::arg("mesh"), py::arg("u"), py::arg("p") = 2.0, py::arg("q") = 1.5, py::arg("lam") = 0.0,
      py::arg("eta") = 0.0, py::arg("m") = 1.0, py::arg("a") = 1.0, py::arg("f") = 1.0);

  mod.def(
      "classify_sign",
      [](const MeshH& mesh, const std::vector<double>& u) { return to_string(classify_sign(from_numpy(mesh, u))); },
      py::arg("mesh"), py::arg("u"));

  mod.def(
      "eta_star",
      [](const MeshH& mesh, double p, double q, double lam, const py::object& m, const py::object& a,
         const py::object& f, int starts, std::uint64_t seed) {
        EtaStarOptions o;
        o.starts = starts;
        o.seed = seed;
        const auto r = eta_star(mesh, as_weight(m), as_weight(a), as_weight(f), p, q, lam, o);
        py::dict d;
        d["value"] = r.value;
        d["lower_bound"] = r.lower_bound ? py::cast(*r.lower_bound) : py::none();
        d["starts_used"] = r.starts_used;
        d["all_start_values"] = r.all_start_values;
        return d;
      },
      py::arg("mesh"), py::arg("p") = 2.0, py::arg("q") = 1.5, py::arg("lam") = 0.0, py::arg("m") = 1.0,
      py::arg("a") = 1.0, py::arg("f") = 1.0, py::arg("starts") = 32, py::arg("seed") = 20240611);

  mod.def("eta_star_lower_bound", &eta_star_lower_bound, py::arg("c_f"), py::arg("p"), py::arg("q"), py::arg("lam"),
          py::arg("lam1_m"), py::arg("lam1_aplus"));

  mod.def(
      "picone_polynomial_check",
      [](double p, double q) {
        const auto r = picone_polynomial_check(p, q);
        py::dict d;
        d["holds"] = r.holds;
        d["min_value"] = r.min_value;
        d["argmin"] = r.argmin;
        d["value_at_zero"] = r.value_at_zero;
        return d;
      },
      py::arg("p"), py::arg("q"));

  mod.def(
      "discrete_picone_check",
      [](const MeshH& mesh, const std::vector<double>& u, const std::vector<double>& phi, double p, double eps) {
        const auto r = discrete_picone_check(from_numpy(mesh, u), from_numpy(mesh, phi), p, eps);
        py::dict d;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        d["slack"] = r.slack;
        d["holds"] = r.holds;
        return d;
      },
      py::arg("mesh"), py::arg("u"), py::arg("phi"), py::arg("p"), py::arg("eps"));

  mod.def(
      "run_sweep",
      [](const std::string& config_text, const std::filesystem::path& csv_path) {
        auto cfg = parse_config(config_text);
        const auto spec = make_problem(cfg);
        const double lam1 = principal_eigenpair(spec.mesh, spec.m, spec.p).lam;
        const double eta_bar = cfg.region.eta_bar.value_or(1.0);
        const auto lams = cfg.lam_grid.is_default() ? default_lam_grid(lam1) : cfg.lam_grid.resolve(lam1);
        const auto etas = cfg.eta_grid.is_default() ? default_eta_grid(eta_bar) : cfg.eta_grid.resolve(eta_bar);
        RegionMap map;
        {
          py::gil_scoped_release release;
          map = sweep(spec, lams, etas, cfg.region);
        }
        if (!csv_path.empty()) write_csv(map, csv_path);
        py::dict d;
        d["lam1"] = map.lam1;
        d["delta_hat_mp"] = map.delta_hat_mp;
        d["delta_hat_amp"] = map.delta_hat_amp;
        d["counterexamples"] = map.counterexamples.size();
        d["cells"] = map.cells.size();
        return d;
      },
      py::arg("config_text"), py::arg("csv_path") = std::filesystem::path());
}
