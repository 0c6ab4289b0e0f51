// Python bindings for the simulator core: table building, scenario presets
// and runs, macro stepping, and the analysis oracles.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clogsim/scenario.hpp"

namespace py = pybind11;
using namespace clogsim;

PYBIND11_MODULE(_clogsim, m) {
  m.doc() = "Two-scale colloid transport and clogging simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TableError>(m, "TableError", PyExc_ValueError);
  py::register_exception<NumericsError>(m, "NumericsError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<TortuosityTensor>(m, "TortuosityTensor")
      .def(py::init<>())
      .def_readwrite("t11", &TortuosityTensor::t11)
      .def_readwrite("t12", &TortuosityTensor::t12)
      .def_readwrite("t21", &TortuosityTensor::t21)
      .def_readwrite("t22", &TortuosityTensor::t22)
      .def("__repr__", [](const TortuosityTensor& t) {
        return "TortuosityTensor(t11=" + std::to_string(t.t11) +
               ", t12=" + std::to_string(t.t12) +
               ", t22=" + std::to_string(t.t22) + ")";
      });

  py::class_<MeshMeta>(m, "MeshMeta")
      .def(py::init<>())
      .def_readwrite("n_theta", &MeshMeta::n_theta)
      .def_readwrite("n_rho", &MeshMeta::n_rho);

  py::class_<TortuosityTable>(m, "TortuosityTable")
      .def_readonly("radii", &TortuosityTable::radii)
      .def_readonly("tensors", &TortuosityTable::tensors)
      .def("interpolate",
           [](const TortuosityTable& t, double r) { return interpolate(t, r); },
           py::arg("r"));

  m.def(
      "build_table",
      [](double r_min, double delta_r, int n_theta, int n_rho) {
        return build_table(r_min, delta_r, {n_theta, n_rho});
      },
      py::arg("r_min"), py::arg("delta_r"), py::arg("n_theta") = 64,
      py::arg("n_rho") = 24,
      "Solve the periodic cell problems over a radius partition and tabulate "
      "the tortuosity tensors (with the fully-clogged anchor at r = 1/2).");
  m.def("save_table", &save_table, py::arg("table"), py::arg("path"));
  m.def(
      "load_table", [](const std::string& path) { return load_table(path); },
      py::arg("path"));
  m.def("porosity", &porosity, py::arg("r"), py::arg("domain_area") = 1.0,
        "Fluid area fraction (1 - pi r^2) / domain_area.");
  m.def("effective_diffusivity", &effective_diffusivity, py::arg("tau"),
        py::arg("r"), py::arg("d_i"), py::arg("domain_area") = 1.0);

  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("steps", &RunSummary::steps)
      .def_readonly("wall_seconds", &RunSummary::wall_seconds)
      .def_readonly("max_radius", &RunSummary::max_radius)
      .def_readonly("clogged_fraction", &RunSummary::clogged_fraction)
      .def_readonly("max_picard_iterations", &RunSummary::max_picard_iterations)
      .def_readonly("monitor_violations", &RunSummary::monitor_violations);

  // configs travel as JSON strings so Python callers can edit them freely
  m.def("preset_uniform", [] { return serialize_config(preset_uniform()); },
        "Reference uniform-radius scenario as a JSON string.");
  m.def("preset_bumps", [] { return serialize_config(preset_bumps()); },
        "Two-bump initial-radius scenario as a JSON string.");
  m.def(
      "validate_config",
      [](const std::string& text) { parse_config(text).validate(); },
      py::arg("config_json"));
  m.def(
      "run_scenario",
      [](const std::string& config_json, const TortuosityTable& table,
         const std::string& out_dir) {
        const ScenarioConfig config = parse_config(config_json);
        config.validate();
        return run_scenario(config, table, out_dir);
      },
      py::arg("config_json"), py::arg("table"), py::arg("out_dir"),
      "Run a scenario described by a JSON config; writes snapshot CSVs and "
      "diagnostics under out_dir and returns a RunSummary.");
  m.def(
      "stability_guard",
      [](const std::string& config_json, const TortuosityTable& table) {
        const ScenarioConfig config = parse_config(config_json);
        GridSpec grid{config.grid_points, 0.0, config.T};
        return stability_guard(grid, config.params, table);
      },
      py::arg("config_json"), py::arg("table"),
      "Largest admissible explicit time step for the scenario's grid.");
  m.def(
      "initial_radius_field",
      [](const std::string& config_json) {
        return initial_radius_field(parse_config(config_json));
      },
      py::arg("config_json"));

  m.def(
      "smoluchowski_rates", &smoluchowski_rates, py::arg("u"), py::arg("gamma"),
      "Truncated aggregation rates; the first moment of the result is zero.");
  m.def("exchange_term", &exchange_term, py::arg("r"), py::arg("u_i"),
        py::arg("v"), py::arg("a_i"), py::arg("beta_i"),
        py::arg("clogged") = false);

  py::class_<AnalysisBox>(m, "AnalysisBox")
      .def(py::init<>())
      .def_readwrite("M", &AnalysisBox::M)
      .def_readwrite("eps1", &AnalysisBox::eps1)
      .def_readwrite("eps2", &AnalysisBox::eps2)
      .def_readwrite("s_max", &AnalysisBox::s_max)
      .def_readwrite("sup_r0", &AnalysisBox::sup_r0)
      .def_readwrite("inf_r0", &AnalysisBox::inf_r0)
      .def_readwrite("sup_v0", &AnalysisBox::sup_v0)
      .def_readwrite("a_sum", &AnalysisBox::a_sum)
      .def_readwrite("b", &AnalysisBox::b);
  m.def("feasible_horizon", &feasible_horizon, py::arg("box"),
        py::arg("alpha_r"),
        "Largest time up to which the radius-corridor inequality holds.");
  m.def(
      "make_analysis_box",
      [](const std::string& config_json) {
        return make_analysis_box(parse_config(config_json));
      },
      py::arg("config_json"));

  m.def("render_heatmap", &render_heatmap, py::arg("field"), py::arg("n"),
        py::arg("palette"), py::arg("path"),
        "Deterministic SVG heatmap of a row-major square field.");
  m.def(
      "read_field_csv",
      [](const std::string& path) {
        const FieldCsv f = read_field_csv(path);
        return py::make_tuple(f.values, f.n, f.t, f.name);
      },
      py::arg("path"), "Returns (values, n, t, name) from a snapshot CSV.");
}
