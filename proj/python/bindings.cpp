#include "hjb/cli.hpp"
#include "hjb/config.hpp"
#include "hjb/errors.hpp"
#include "hjb/harness.hpp"
#include "hjb/scheme.hpp"
#include "hjb/stencil.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace {

hjb::StencilKind stencil_kind(const std::string& name) {
  if (name == "kushner") return hjb::StencilKind::kushner;
  if (name == "bz") return hjb::StencilKind::bonnans_zidani;
  throw hjb::ConfigError("config: unknown stencil '" + name + "'");
}

hjb::ThetaScheme build_scheme(const hjb::LoadedProblem& loaded, int nx, int time_steps, double theta,
                              const std::string& stencil) {
  const hjb::SpaceTimeGrid grid = hjb::SpaceTimeGrid::for_problem(loaded.problem, nx, time_steps);
  hjb::SchemeOptions options;
  options.theta = theta;
  options.stencil = stencil_kind(stencil);
  return hjb::ThetaScheme(loaded.problem, grid, options);
}

py::dict solve(const std::string& json_text, int nx, int time_steps, double theta,
               const std::string& stencil) {
  const hjb::LoadedProblem loaded = hjb::parse_problem(json_text);
  const hjb::ThetaScheme scheme = build_scheme(loaded, nx, time_steps, theta, stencil);
  const hjb::Trajectory traj = scheme.solve();
  const hjb::SpaceTimeGrid& g = scheme.grid();
  const auto levels = static_cast<py::ssize_t>(traj.levels.size());
  const auto nodes = static_cast<py::ssize_t>(g.node_count());

  py::array_t<double> times(levels);
  py::array_t<double> values({levels, nodes});
  py::array_t<double> coords({nodes, static_cast<py::ssize_t>(g.dim())});
  auto t = times.mutable_unchecked<1>();
  auto v = values.mutable_unchecked<2>();
  auto x = coords.mutable_unchecked<2>();
  for (py::ssize_t n = 0; n < levels; ++n) {
    t(n) = g.time(static_cast<int>(n));
    for (py::ssize_t i = 0; i < nodes; ++i) v(n, i) = traj.levels[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
  }
  for (py::ssize_t i = 0; i < nodes; ++i) {
    const hjb::Vector node = g.node(static_cast<std::size_t>(i));
    for (int d = 0; d < g.dim(); ++d) x(i, d) = node[d];
  }
  py::dict out;
  out["times"] = times;
  out["values"] = values;
  out["nodes"] = coords;
  if (loaded.exact) {
    const hjb::GridFunction exact =
        hjb::GridFunction::sample(g, [&](const hjb::Vector& p) { return (*loaded.exact)(g.horizon(), p); });
    out["error"] = hjb::sup_norm(exact - traj.levels.back());
  }
  return out;
}

py::dict cfl_check(const std::string& json_text, int nx, int time_steps, double theta,
                   const std::string& stencil) {
  const hjb::CflReport r = build_scheme(hjb::parse_problem(json_text), nx, time_steps, theta, stencil).cfl_check();
  py::dict out;
  out["ok"] = r.ok;
  out["explicit_worst"] = r.explicit_worst;
  out["implicit_worst"] = r.implicit_worst;
  return out;
}

py::dict stencil_dict(const hjb::SpatialStencil& s) {
  py::dict out;
  for (const auto& [beta, w] : s.entries()) out[py::tuple(py::cast(beta))] = w;
  return out;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = hjb::cli::run(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_hjbcore, m) {
  m.doc() = "Monotone schemes for periodic HJB equations";

  static py::exception<hjb::ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<hjb::NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const hjb::ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const hjb::NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  m.def("solve", &solve, py::arg("config"), py::arg("nx"), py::arg("time_steps"), py::arg("theta") = 1.0,
        py::arg("stencil") = "kushner",
        "Solve a problem given as JSON text; returns times, values (level x node), nodes and, if the\n"
        "problem declares an exact solution, the sup-norm error at the horizon.");
  m.def("cfl_check", &cfl_check, py::arg("config"), py::arg("nx"), py::arg("time_steps"),
        py::arg("theta") = 1.0, py::arg("stencil") = "kushner");
  m.def(
      "kushner_stencil",
      [](const hjb::Matrix& a, const hjb::Vector& b, double dx) { return stencil_dict(hjb::kushner_stencil(a, b, dx)); },
      py::arg("a"), py::arg("b"), py::arg("dx"), "Offset tuple -> weight.");
  m.def(
      "bz_decompose",
      [](const hjb::Matrix& a, int max_order) {
        const hjb::BzDecomposition dec = hjb::bz_decompose(a, max_order);
        return py::make_tuple(dec.directions, dec.weights, dec.residual);
      },
      py::arg("a"), py::arg("max_order") = 2, "Returns (directions, weights, residual).");
  m.def(
      "fit_order",
      [](const std::vector<double>& params, const std::vector<double>& errors) {
        const hjb::FitResult f = hjb::fit_order(params, errors);
        py::dict out;
        out["slope"] = f.slope;
        out["r_squared"] = f.r_squared;
        out["points"] = f.points;
        out["degenerate"] = f.degenerate;
        out["note"] = f.note;
        return out;
      },
      py::arg("params"), py::arg("errors"));
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");
}
