#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "thinlab/cli_io.hpp"
#include "thinlab/errors.hpp"
#include "thinlab/exact.hpp"
#include "thinlab/grid.hpp"
#include "thinlab/vi_solver.hpp"

namespace py = pybind11;
using namespace thinlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Row-major with the last axis fastest, the grid storage order.
Array to_array(const ScalarField& U) {
  const auto m = static_cast<py::ssize_t>(U.grid().nodes_per_axis());
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(U.dim()), m);
  Array out(shape);
  std::copy(U.values().begin(), U.values().end(), out.mutable_data());
  return out;
}

ScalarField from_array(const Array& a) {
  const auto nd = a.ndim();
  if (nd != 2 && nd != 3) throw Error(ErrorKind::InvalidArgument, "field must be a 2-D or 3-D array");
  const auto m = a.shape(0);
  for (py::ssize_t k = 1; k < nd; ++k)
    if (a.shape(k) != m) throw Error(ErrorKind::InvalidArgument, "field array must have equal sides");
  const Grid g(static_cast<int>(nd), static_cast<int>(m));
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

RunConfig config_of(const std::string& text, const std::map<std::string, std::string>& overrides) {
  RunConfig cfg = RunConfig::parse(text);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_thinlab, m) {
  m.doc() = "Thin-obstacle solver and free-boundary analysis";
  py::register_exception<Error>(m, "ThinlabError", PyExc_ValueError);

  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  m.def(
      "solve",
      [](const std::string& config, const std::map<std::string, std::string>& overrides, bool include_thin) {
        const RunConfig cfg = config_of(config, overrides);
        cfg.validate();
        const SignoriniProblem p = problem_from_config(cfg);
        const SolverConfig sc = solver_from_config(cfg);
        Solution sol = [&] {
          py::gil_scoped_release release;
          return solve_psor(p, sc);
        }();
        Json r;
        r["schema_version"] = kSchemaVersion;
        r["command"] = "solve";
        r["grid"] = {{"n", p.grid.dim()}, {"m", p.grid.nodes_per_axis()}, {"h", p.grid.spacing(0)}};
        r["solver"] = solution_json(sol, include_thin);
        return py::make_tuple(to_array(sol.U), dump_json(r));
      },
      py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("include_thin") = false, "Solve the problem of a config text; returns (field, report JSON).");

  m.def(
      "exact",
      [](const std::string& kind, int n, int m, std::vector<double> nu, double amplitude, int degree) {
        ExactParams ep;
        if (!nu.empty()) ep.nu = Eigen::Map<const Vec>(nu.data(), static_cast<Eigen::Index>(nu.size()));
        ep.amplitude = amplitude;
        ep.degree = degree;
        return to_array(exact_solution_field(Grid(n, m), exact_kind_from_string(kind), ep));
      },
      py::arg("kind"), py::arg("n") = 2, py::arg("m") = 129, py::arg("nu") = std::vector<double>{},
      py::arg("amplitude") = 1.0, py::arg("degree") = 2, "Sample a closed-form solution on [-1, 1]^n.");

  m.def(
      "frequency",
      [](const Array& field, std::vector<double> at, const std::string& config,
         const std::map<std::string, std::string>& overrides) {
        const ScalarField U = from_array(field);
        const Vec x0 = Eigen::Map<const Vec>(at.data(), static_cast<Eigen::Index>(at.size()));
        py::gil_scoped_release release;
        FrequencyRun run = run_frequency(U, config_of(config, overrides), x0);
        run.report["profile"] = {{"r", run.profile.frequency.radii},
                                 {"N", run.profile.frequency.N},
                                 {"Nhat", run.profile.frequency.Nhat},
                                 {"W", run.profile.weiss.W}};
        return dump_json(run.report);
      },
      py::arg("field"), py::arg("at"), py::arg("config") = "",
      py::arg("overrides") = std::map<std::string, std::string>{}, "Frequency estimate at a thin point (JSON).");

  m.def(
      "classify",
      [](const Array& field, const std::string& config, const std::map<std::string, std::string>& overrides) {
        const ScalarField U = from_array(field);
        RunConfig cfg = config_of(config, overrides);
        if (!cfg.has("problem.n")) cfg.set("problem.n", std::to_string(U.dim()));
        py::gil_scoped_release release;
        return dump_json(run_classify(U, cfg).report);
      },
      py::arg("field"), py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Free-boundary classification report (JSON).");

  m.def("selftest", [] { return dump_json(run_selftest().report); });

  m.def(
      "read_field", [](const std::string& path) { return to_array(read_sgf1(path)); }, py::arg("path"));
  m.def(
      "write_field", [](const std::string& path, const Array& field) { write_sgf1(path, from_array(field)); },
      py::arg("path"), py::arg("field"));
}
