#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adiaspec/counterdiabatic.hpp"
#include "adiaspec/dynamics.hpp"
#include "adiaspec/experiments.hpp"
#include "adiaspec/filter.hpp"
#include "adiaspec/linresp.hpp"

namespace py = pybind11;
using namespace adiaspec;

namespace {

FilterFunction make_filter(double gamma, const std::string& interp) { return FilterFunction(gamma, parse_interp(interp)); }

HamiltonianPath chain_path(const std::string& model, const std::string& schedule, int length) {
  Lattice lat = make_chain(length);
  return HamiltonianPath(make_model(model, schedule, lat), Volume::of(lat));
}

std::string run_json(const std::string& config, int threads) {
  RunConfig cfg = parse_config(nlohmann::json::parse(config));
  validate_config(cfg);
  RunResult r = run_experiment(cfg, threads);
  nlohmann::json out = {{"columns", r.columns}, {"rows", r.rows}, {"summary", r.summary}, {"pass", r.pass},
                        {"config", to_json(cfg)}};
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_adiaspec, m) {
  m.doc() = "adiabatic evolution, spectral flow and linear response on small spin lattices";

  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<GapError>(m, "GapError", numerical.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<HamiltonianPath>(m, "Path")
      .def(py::init(&chain_path), py::arg("model"), py::arg("schedule") = "linear", py::arg("length") = 4,
           "Hamiltonian path of a preset model on an open chain")
      .def("hamiltonian", &HamiltonianPath::dense, py::arg("s"), py::arg("derivative") = 0)
      .def_property_readonly("dim", &HamiltonianPath::dim);

  m.def("list_experiments", &list_experiments);
  m.def("_run_json", &run_json, py::arg("config"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "patch_projector",
      [](const Mat& h, int k) {
        auto [spec, p] = diagonalize_and_patch(h, Selector::lowest_k(k));
        return py::make_tuple(p.projector, p.gap, spec.eigenvalues);
      },
      py::arg("h"), py::arg("k") = 1, "projector onto the k lowest levels, its gap, and the spectrum");

  m.def(
      "filter_map",
      [](const Mat& h, const Mat& a, double gamma, const std::string& interp) {
        return apply_filter_map(diagonalize(h), a, make_filter(gamma, interp));
      },
      py::arg("h"), py::arg("a"), py::arg("gamma") = 0.5, py::arg("interp") = "linear");

  m.def(
      "filter_map_timedomain",
      [](const Mat& h, const Mat& a, double gamma, const std::string& interp, double t_max, double dt) {
        FilterFunction w = make_filter(gamma, interp);
        w.with_time_kernel(t_max, dt);
        TimeDomainResult r = apply_filter_timedomain(h, a, w);
        return py::make_tuple(r.value, r.error_bound);
      },
      py::arg("h"), py::arg("a"), py::arg("gamma") = 0.5, py::arg("interp") = "linear", py::arg("t_max") = 1000.0,
      py::arg("dt") = 0.02);

  m.def(
      "flow_generator",
      [](const HamiltonianPath& p, double s, int k, double gamma) {
        return spectral_flow_generator(p, s, Selector::lowest_k(k), FilterFunction(gamma));
      },
      py::arg("path"), py::arg("s"), py::arg("k") = 1, py::arg("gamma") = 0.5);

  m.def(
      "dressing_defect",
      [](const HamiltonianPath& p, double s, int n, double eps, int k, double gamma) {
        return dressing_defect(p, s, n, eps, FilterFunction(gamma), Selector::lowest_k(k));
      },
      py::arg("path"), py::arg("s"), py::arg("n"), py::arg("eps"), py::arg("k") = 1, py::arg("gamma") = 0.5);

  m.def(
      "evolve_state",
      [](const HamiltonianPath& p, double eps, const Vec& psi0, const std::vector<double>& grid,
         const std::string& method) {
        EvolveOptions opt;
        opt.method = parse_integrator(method);
        Trajectory tr = evolve_state(p, eps, psi0, grid, opt);
        Mat out(static_cast<Eigen::Index>(grid.size()), psi0.size());
        for (std::size_t i = 0; i < grid.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = tr.state(i).transpose();
        return out;
      },
      py::arg("path"), py::arg("eps"), py::arg("psi0"), py::arg("grid"), py::arg("method") = "magnus4",
      "states on the grid, one per row");

  m.def(
      "kubo",
      [](const Mat& h, const Mat& v, const Mat& j, double gamma, int k) {
        return kubo_commutator(h, v, j, FilterFunction(gamma), Selector::lowest_k(k)).value;
      },
      py::arg("h"), py::arg("v"), py::arg("j"), py::arg("gamma") = 0.5, py::arg("k") = 1);

  m.def(
      "kubo_time_integral",
      [](const Mat& h, const Mat& v, const Mat& j, const std::vector<double>& deltas, int k) {
        KuboIntegral r = kubo_time_integral(h, v, j, deltas, Selector::lowest_k(k));
        py::dict d;
        d["deltas"] = r.deltas;
        d["values"] = r.values;
        d["extrapolated"] = r.extrapolated;
        d["exact_limit"] = r.exact_limit;
        return d;
      },
      py::arg("h"), py::arg("v"), py::arg("j"), py::arg("deltas"), py::arg("k") = 1);
}
