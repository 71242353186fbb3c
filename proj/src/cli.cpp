#include "hjb/cli.hpp"

#include "hjb/config.hpp"
#include "hjb/errors.hpp"
#include "hjb/grid.hpp"
#include "hjb/harness.hpp"
#include "hjb/scheme.hpp"
#include "hjb/semigroup.hpp"
#include "hjb/stencil.hpp"
#include "hjb/switching.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hjb::cli {

namespace {

/// A probe or rate verdict failed; maps to exit 3.
class AcceptanceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void config_fail(const std::string& reason) { throw ConfigError("config: " + reason); }

StencilKind parse_stencil(const std::string& name) {
  if (name == "kushner") return StencilKind::kushner;
  if (name == "bz" || name == "bonnans_zidani") return StencilKind::bonnans_zidani;
  config_fail("unknown stencil '" + name + "' (use kushner or bz)");
}

/// Command-line values first, then the problem's scheme block, then defaults.
struct Resolved {
  double theta;
  StencilKind stencil;
  int nx;
  std::optional<double> dt;
  double cfl_factor;
};

Resolved resolve(const RunConfig& c, const SchemeDefaults& d, double default_theta, int default_nx) {
  Resolved r;
  r.theta = c.theta.value_or(d.theta.value_or(default_theta));
  r.stencil = parse_stencil(c.stencil.value_or(d.stencil.value_or("kushner")));
  r.nx = c.nx.value_or(d.nx.value_or(default_nx));
  r.dt = c.dt ? c.dt : d.dt;
  r.cfl_factor = c.cfl_factor.value_or(d.cfl_factor.value_or(0.9));
  if (!(r.theta >= 0.0 && r.theta <= 1.0)) config_fail("theta must lie in [0, 1]");
  if (r.nx < 3) config_fail("nx must be at least 3");
  if (r.dt && !(*r.dt > 0.0)) config_fail("dt must be positive");
  if (!(r.cfl_factor > 0.0)) config_fail("cfl-factor must be positive");
  return r;
}

SchemeOptions scheme_options(const Resolved& r, const RunConfig& c) {
  SchemeOptions o;
  o.theta = r.theta;
  o.stencil = r.stencil;
  o.bz_max_order = c.max_order;
  return o;
}

/// Explicit dt, else dt_factor * dx^dt_power, else the largest CFL-stable
/// step times the CFL factor (capped at dx).
int choose_time_steps(const HjbProblem& problem, int nx, const SchemeOptions& options,
                      const Resolved& r, const RunConfig& c) {
  if (r.dt) return SpaceTimeGrid::steps_for(problem.horizon, *r.dt);
  const SpaceTimeGrid space = SpaceTimeGrid::for_problem(problem, nx, 1);
  if (c.dt_factor > 0.0)
    return SpaceTimeGrid::steps_for(problem.horizon, c.dt_factor * std::pow(space.dx(), c.dt_power));
  const double limit = max_stable_time_step(problem, space, options);
  return SpaceTimeGrid::steps_for(problem.horizon, std::min(space.dx(), r.cfl_factor * limit));
}

SpaceTimeGrid make_grid(const HjbProblem& problem, int nx, int nt) {
  try {
    return SpaceTimeGrid::for_problem(problem, nx, nt);
  } catch (const std::invalid_argument& e) {
    config_fail(e.what());
  }
}

std::string cfl_message(const CflReport& cfl) {
  std::ostringstream os;
  os << "CFL violated: explicit " << format_number(cfl.explicit_worst) << " (level "
     << cfl.explicit_level << ", node " << cfl.explicit_node << ", control " << cfl.explicit_control
     << "), implicit " << format_number(cfl.implicit_worst) << " (level " << cfl.implicit_level
     << ", node " << cfl.implicit_node << ", control " << cfl.implicit_control << ")";
  return os.str();
}

std::string plot_path(const std::string& csv) {
  const std::string::size_type dot = csv.rfind('.');
  const std::string::size_type slash = csv.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return csv.substr(0, dot) + ".gp";
  return csv + ".gp";
}

template <class Write>
void write_file(const std::string& path, Write&& write) {
  std::ofstream os(path);
  if (!os) config_fail("cannot write " + path);
  write(os);
  if (!os) config_fail("write failed: " + path);
}

void write_rate_artifacts(const std::string& path, const RateReport& report, const Verdict& verdict) {
  write_file(path, [&](std::ostream& os) { write_rate_csv(os, report, verdict); });
  write_file(plot_path(path), [&](std::ostream& os) { write_plot_script(os, path, report); });
}

void print_report(std::ostream& out, const std::string& name, const RateReport& report,
                  const Verdict& verdict) {
  out << name << ": " << report.parameter_name << " levels=" << report.levels.size();
  for (const RateLevel& l : report.levels) {
    out << "\n  " << report.parameter_name << '=' << format_number(l.parameter);
    if (l.failed)
      out << " failed: " << l.failure;
    else
      out << " err=" << format_number(l.err_total) << " (+" << format_number(l.err_plus) << ", -"
          << format_number(l.err_minus) << ')';
  }
  out << "\n  slope=" << (report.fit.degenerate ? std::string("degenerate") : format_number(report.fit.slope))
      << " bound=" << format_number(report.theoretical_exponent) << " verdict="
      << (verdict.pass ? "pass" : "fail") << " (" << verdict.reason << ")\n";
}

std::vector<double> parse_list(const std::vector<double>& given, std::vector<double> fallback,
                               const char* what) {
  std::vector<double> out = given.empty() ? std::move(fallback) : given;
  for (double v : out)
    if (!(v > 0.0)) config_fail(std::string(what) + " entries must be positive");
  return out;
}

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const LoadedProblem loaded = load_problem_file(c.config_path);
  const HjbProblem& problem = loaded.problem;
  const Resolved r = resolve(c, loaded.scheme, 1.0, 64);
  const SchemeOptions options = scheme_options(r, c);

  const A1Estimate a1 = verify_A1(problem, 16);
  if (a1.flagged) err << "warning: " << a1.note << '\n';

  const SpaceTimeGrid grid = make_grid(problem, r.nx, choose_time_steps(problem, r.nx, options, r, c));
  const ThetaScheme scheme(problem, grid, options);
  const CflReport cfl = scheme.cfl_check();
  if (!cfl.ok && !c.force) throw NumericalError(cfl_message(cfl));
  const Trajectory traj = scheme.solve();

  const std::string path = c.out_path.empty() ? "traj.csv" : c.out_path;
  write_file(path, [&](std::ostream& os) { write_trajectory_csv(os, traj.levels, c.stride); });
  write_file(plot_path(path), [&](std::ostream& os) {
    const std::string T = format_number(grid.time(grid.time_steps()));
    os << "# gnuplot script: solution at t = " << T << "\n"
       << "set datafile separator ','\n"
       << "set xlabel 'x_1'\n";
    if (problem.dim == 2)
      os << "splot '" << path << "' every ::1 using 2:3:($1==" << T << "?$4:1/0) with points title 'u'\n";
    else
      os << "plot '" << path << "' every ::1 using 2:($1==" << T << "?$" << problem.dim + 2
         << ":1/0) with linespoints title 'u'\n";
  });

  out << "solve: nx=" << r.nx << " nt=" << grid.time_steps() << " dt=" << format_number(grid.dt())
      << " theta=" << format_number(r.theta) << " cfl=" << (cfl.ok ? "ok" : "violated")
      << " sup|u(T)|=" << format_number(sup_norm(traj.levels.back()));
  if (loaded.exact) {
    const GridFunction exact = GridFunction::sample(grid, [&](const Vector& x) {
      return (*loaded.exact)(problem.horizon, x);
    });
    out << " error=" << format_number(sup_norm(exact - traj.levels.back()));
  }
  out << "\n";
  return exit_ok;
}

int cmd_rates(const RunConfig& c, std::ostream& out, std::ostream&) {
  const LoadedProblem loaded = load_problem_file(c.config_path);
  const HjbProblem& problem = loaded.problem;
  const Resolved r = resolve(c, loaded.scheme, 1.0, 64);
  const SchemeOptions options = scheme_options(r, c);

  std::vector<int> nxs = c.levels.empty() ? std::vector<int>{16, 32, 64, 128} : c.levels;
  std::vector<RefinementLevel> levels;
  for (int nx : nxs) {
    if (nx < 3) config_fail("levels must be at least 3");
    levels.push_back({nx, choose_time_steps(problem, nx, options, r, c)});
  }

  std::optional<ReferenceSolution> reference;
  if (loaded.exact) {
    reference = ReferenceSolution::exact(*loaded.exact);
  } else {
    const int finest = *std::max_element(nxs.begin(), nxs.end());
    const int ref_nx = c.reference_nx > 0 ? c.reference_nx : 4 * finest;
    for (int nx : nxs) {
      const int ratio = ref_nx / nx;
      if (ref_nx % nx != 0 || (ratio & (ratio - 1)) != 0)
        config_fail("reference-nx must be a power-of-two multiple of every level");
    }
    int ref_nt = choose_time_steps(problem, ref_nx, options, r, c);
    if (c.max_over_time) {
      long common = 1;
      for (const RefinementLevel& l : levels) common = std::lcm(common, static_cast<long>(l.time_steps));
      if (common > 1000000) config_fail("level time steps have no manageable common multiple");
      ref_nt = static_cast<int>(((ref_nt + common - 1) / common) * common);
    }
    const ThetaScheme ref_scheme(problem, make_grid(problem, ref_nx, ref_nt), options);
    const CflReport cfl = ref_scheme.cfl_check();
    if (!cfl.ok && !c.force) throw NumericalError("reference grid: " + cfl_message(cfl));
    reference = ReferenceSolution::fine_grid(ref_scheme.solve().levels);
  }

  RefinementOptions refinement;
  refinement.force = c.force;
  refinement.max_over_time = c.max_over_time;
  RateReport report = run_refinement(problem, options, levels, *reference, refinement);
  report.theoretical_exponent = c.exponent >= 0.0 ? c.exponent : 0.2;
  const Verdict verdict = compare_bounds(report, report.theoretical_exponent);

  write_rate_artifacts(c.out_path.empty() ? "rates.csv" : c.out_path, report, verdict);
  print_report(out, "rates", report, verdict);
  for (const RateLevel& l : report.levels)
    if (l.failed) throw NumericalError("level with dx=" + format_number(l.dx) + ": " + l.failure);
  if (!verdict.pass) throw AcceptanceFailure("rates: " + verdict.reason);
  return exit_ok;
}

int cmd_switching(const RunConfig& c, std::ostream& out, std::ostream&) {
  const LoadedProblem loaded = load_problem_file(c.config_path);
  const HjbProblem& problem = loaded.problem;
  if (c.modes_path.empty()) config_fail("--modes is required");
  const std::vector<std::vector<std::size_t>> modes = load_modes_file(c.modes_path, problem);
  const Resolved r = resolve(c, loaded.scheme, 0.0, 64);
  const SchemeOptions options = scheme_options(r, c);
  const std::vector<double> ks = parse_list(c.k_list, {0.4, 0.2, 0.1, 0.05}, "k-list");

  const SpaceTimeGrid grid = make_grid(problem, r.nx, choose_time_steps(problem, r.nx, options, r, c));
  const ThetaScheme full(problem, grid, options);
  const CflReport cfl = full.cfl_check();
  if (!cfl.ok && !c.force) throw NumericalError(cfl_message(cfl));

  KRateResult result = [&] {
    try {
      return k_rate_experiment(problem, modes, ks, grid, options, c.max_over_time);
    } catch (const std::invalid_argument& e) {
      config_fail(e.what());
    }
  }();
  result.report.theoretical_exponent = c.exponent >= 0.0 ? c.exponent : 1.0 / 3.0;
  Verdict verdict = compare_bounds(result.report, result.report.theoretical_exponent);
  const double floor = -1e-6 * std::max(1.0, result.reference_scale);
  if (result.min_difference < floor) {
    verdict.pass = false;
    verdict.reason = "v_i - u_ref = " + format_number(result.min_difference) + " below zero";
  }
  if (result.max_band_excess > 1e-9) {
    verdict.pass = false;
    verdict.reason = "coupling band exceeds k by " + format_number(result.max_band_excess);
  }

  write_rate_artifacts(c.out_path.empty() ? "sw_rates.csv" : c.out_path, result.report, verdict);
  print_report(out, "switching", result.report, verdict);
  out << "  min(v_i - u_ref)=" << format_number(result.min_difference)
      << " band_excess=" << format_number(result.max_band_excess)
      << " monotone_in_k=" << (result.monotone_in_k ? "yes" : "no") << '\n';
  if (!verdict.pass) throw AcceptanceFailure("switching: " + verdict.reason);
  return exit_ok;
}

SemigroupExperimentOptions semigroup_options(const RunConfig& c) {
  if (c.reference_ratio < 1) config_fail("reference-ratio must be positive");
  SemigroupExperimentOptions o;
  o.reference_ratio = c.reference_ratio;
  return o;
}

int finish_semigroup(const RunConfig& c, std::ostream& out, const char* name,
                     const std::string& default_out, SemigroupRateResult& result,
                     double default_exponent, bool one_sided) {
  result.report.theoretical_exponent = c.exponent >= 0.0 ? c.exponent : default_exponent;
  Verdict verdict = compare_bounds(result.report, result.report.theoretical_exponent);
  const double floor = -1e-6 * std::max(1.0, result.reference_scale);
  if (one_sided && result.min_difference < floor) {
    verdict.pass = false;
    verdict.reason = "u_h - u_ref = " + format_number(result.min_difference) + " below zero";
  }
  write_rate_artifacts(c.out_path.empty() ? default_out : c.out_path, result.report, verdict);
  print_report(out, name, result.report, verdict);
  out << "  min(u_h - u_ref)=" << format_number(result.min_difference)
      << " reference_dt=" << format_number(result.reference_dt)
      << " inner_error=" << format_number(result.inner_error) << '\n';
  if (!verdict.pass) throw AcceptanceFailure(std::string(name) + ": " + verdict.reason);
  return exit_ok;
}

const std::vector<double> default_dt_list = {0.1, 0.05, 0.025, 0.0125};

int cmd_split(const RunConfig& c, std::ostream& out, std::ostream&) {
  const SplitProblem sp = load_split_file(c.config_path);
  const int nx = c.nx.value_or(64);
  if (nx < 3) config_fail("nx must be at least 3");
  const std::vector<double> dts = parse_list(c.dt_list, default_dt_list, "dt-list");
  const SpaceTimeGrid space(sp.dim, sp.period, nx, sp.horizon, 1);
  const StepperFactory factory = [&](double dt, int inner) -> MacroStepper {
    auto stepper = std::make_shared<SplittingStepper>(sp, space, dt, inner);
    return [stepper](const GridFunction& u) { return stepper->step(u); };
  };
  SemigroupRateResult result = [&] {
    try {
      return semigroup_rate_experiment(factory, combined_problem(sp), space, dts, semigroup_options(c));
    } catch (const std::invalid_argument& e) {
      config_fail(e.what());
    }
  }();
  return finish_semigroup(c, out, "split", "split_rates.csv", result, 1.0 / 13.0, false);
}

int cmd_pcc(const RunConfig& c, std::ostream& out, std::ostream&) {
  const LoadedProblem loaded = load_problem_file(c.config_path);
  const HjbProblem& problem = loaded.problem;
  if (problem.coefficients.time_dependent) config_fail("pcc needs time-independent coefficients");
  const int nx = c.nx.value_or(loaded.scheme.nx.value_or(64));
  if (nx < 3) config_fail("nx must be at least 3");
  const std::vector<double> dts = parse_list(c.dt_list, default_dt_list, "dt-list");
  const SpaceTimeGrid space = make_grid(problem, nx, 1);
  const StepperFactory factory = [&](double dt, int inner) -> MacroStepper {
    auto stepper = std::make_shared<PcStepper>(problem, space, dt, inner);
    return [stepper](const GridFunction& u) { return stepper->step(u); };
  };
  SemigroupRateResult result = [&] {
    try {
      return semigroup_rate_experiment(factory, problem, space, dts, semigroup_options(c));
    } catch (const std::invalid_argument& e) {
      config_fail(e.what());
    }
  }();
  return finish_semigroup(c, out, "pcc", "pcc_rates.csv", result, 0.1, true);
}

int cmd_decompose(const RunConfig& c, std::ostream& out, std::ostream&) {
  const Matrix a = load_matrix_file(c.config_path);
  const BzDecomposition dec = [&] {
    try {
      return bz_decompose(a, c.max_order);
    } catch (const std::invalid_argument& e) {
      config_fail(e.what());
    }
  }();
  auto write = [&](std::ostream& os) {
    os << "kind,entry,value\n";
    for (std::size_t k = 0; k < dec.directions.size(); ++k) {
      os << "direction,";
      for (std::size_t d = 0; d < dec.directions[k].size(); ++d) os << (d ? " " : "") << dec.directions[k][d];
      os << ',' << format_number(dec.weights[k]) << '\n';
    }
    for (int i = 0; i < dec.residual.rows(); ++i)
      for (int j = 0; j < dec.residual.cols(); ++j)
        os << "residual," << i << ' ' << j << ',' << format_number(dec.residual(i, j)) << '\n';
  };
  if (c.out_path.empty()) {
    write(out);
  } else {
    write_file(c.out_path, write);
    out << "decompose: " << dec.directions.size() << " directions, residual "
        << format_number(dec.residual.cwiseAbs().maxCoeff()) << '\n';
  }
  return exit_ok;
}

int cmd_probe(const RunConfig& c, std::ostream& out, std::ostream&) {
  const LoadedProblem loaded = load_problem_file(c.config_path);
  const HjbProblem& problem = loaded.problem;
  const Resolved r = resolve(c, loaded.scheme, 1.0, 32);
  const SchemeOptions options = scheme_options(r, c);
  if (c.trials < 1) config_fail("trials must be positive");

  const SpaceTimeGrid grid = make_grid(problem, r.nx, choose_time_steps(problem, r.nx, options, r, c));
  const ThetaScheme scheme(problem, grid, options);
  const CflReport cfl = scheme.cfl_check();
  if (!cfl.ok) out << "probe: warning: " << cfl_message(cfl) << '\n';

  struct Row {
    std::string name;
    ProbeResult result;
  };
  std::vector<Row> rows;
  rows.push_back({"monotonicity", monotonicity_probe(scheme, c.trials, c.seed)});
  // The trajectories below are only meaningful for a monotone scheme.
  if (rows.back().result.passed) {
    const Forcing g1 = [](double, const Vector&) { return 0.0; };
    const Forcing g2 = [](double, const Vector&) { return 1.0; };
    const Trajectory u = scheme.solve(&g1);
    const Trajectory v = scheme.solve(&g2);
    rows.push_back({"comparison", comparison_bound_check(scheme, u.levels, v.levels, g1, g2)});
    rows.push_back({"apriori", apriori_bounds_check(u.levels, problem)});
  }

  if (!c.out_path.empty()) {
    write_file(c.out_path, [&](std::ostream& os) {
      os << "probe,passed,checks,worst,witness\n";
      for (const Row& row : rows)
        os << row.name << ',' << (row.result.passed ? "pass" : "fail") << ',' << row.result.checks
           << ',' << format_number(row.result.worst) << ",\"" << row.result.witness << "\"\n";
    });
  }
  std::string failures;
  for (const Row& row : rows) {
    out << "probe: " << row.name << ' ' << (row.result.passed ? "pass" : "fail")
        << " checks=" << row.result.checks << " worst=" << format_number(row.result.worst) << '\n';
    if (!row.result.passed) {
      out << "  witness: " << row.result.witness << '\n';
      if (failures.empty()) failures = row.name + " violated: " + row.result.witness;
    }
  }
  if (!failures.empty()) throw AcceptanceFailure("probe: " + failures);
  return exit_ok;
}

}  // namespace

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::solve: return cmd_solve(config, out, err);
      case Command::rates: return cmd_rates(config, out, err);
      case Command::switching: return cmd_switching(config, out, err);
      case Command::split: return cmd_split(config, out, err);
      case Command::pcc: return cmd_pcc(config, out, err);
      case Command::decompose: return cmd_decompose(config, out, err);
      case Command::probe: return cmd_probe(config, out, err);
    }
    return exit_config;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical: " << e.what() << '\n';
    return exit_numerical;
  } catch (const AcceptanceFailure& e) {
    err << e.what() << '\n';
    return exit_failure;
  } catch (const std::invalid_argument& e) {
    err << "config: " << e.what() << '\n';
    return exit_config;
  } catch (const std::out_of_range& e) {
    err << "config: " << e.what() << '\n';
    return exit_config;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monotone schemes for parabolic HJB equations", "hjb"};
  app.require_subcommand(1);
  RunConfig c;
  std::string stencil;
  double theta = 0.0, dt = 0.0, cfl = 0.0;
  int nx = 0;

  auto add_config = [&](CLI::App* sub, const char* what) {
    sub->add_option("--config", c.config_path, what)->required();
  };
  auto add_scheme = [&](CLI::App* sub) {
    sub->add_option("--theta", theta, "theta in [0,1] (default 1; switching 0)");
    sub->add_option("--nx", nx, "grid points per dimension");
    sub->add_option("--dt", dt, "time step target (rounded down to divide the horizon)");
    sub->add_option("--cfl-factor", cfl, "fraction of the largest stable step (default 0.9)");
    sub->add_option("--stencil", stencil, "kushner or bz")->check(CLI::IsMember({"kushner", "bz"}));
    sub->add_option("--max-order", c.max_order, "largest BZ direction component")->capture_default_str();
  };
  auto add_out = [&](CLI::App* sub, const char* fallback) {
    sub->add_option("--out", c.out_path, std::string("output CSV (default ") + fallback + ")");
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve a problem with the theta-scheme");
  add_config(solve, "problem JSON");
  add_scheme(solve);
  add_out(solve, "traj.csv");
  solve->add_flag("--force", c.force, "run even if the CFL check fails");
  solve->add_option("--stride", c.stride, "write every stride-th time level")->check(CLI::PositiveNumber);

  CLI::App* rates = app.add_subcommand("rates", "Refinement study with a fitted order");
  add_config(rates, "problem JSON");
  add_scheme(rates);
  add_out(rates, "rates.csv");
  rates->add_option("--levels", c.levels, "points per dimension of each level")->delimiter(',');
  rates->add_option("--dt-factor", c.dt_factor, "dt = factor * dx^power");
  rates->add_option("--dt-power", c.dt_power, "exponent of dx in dt")->capture_default_str();
  rates->add_option("--exponent", c.exponent, "lower bound on the slope (default 0.2)");
  rates->add_option("--reference-nx", c.reference_nx, "fine reference grid if no exact solution");
  rates->add_flag("--max-over-time", c.max_over_time, "errors over all time levels");
  rates->add_flag("--force", c.force, "run CFL-violating levels");

  CLI::App* sw = app.add_subcommand("switching", "Switching-system rate in the cost k");
  add_config(sw, "problem JSON");
  sw->add_option("--modes", c.modes_path, "modes JSON")->required();
  add_scheme(sw);
  add_out(sw, "sw_rates.csv");
  sw->add_option("--k-list", c.k_list, "switching costs")->delimiter(',');
  sw->add_option("--exponent", c.exponent, "lower bound on the slope (default 1/3)");
  sw->add_flag("--max-over-time", c.max_over_time, "errors over all time levels");
  sw->add_flag("--force", c.force, "run even if the CFL check fails");

  CLI::App* split = app.add_subcommand("split", "Operator-splitting rate in dt");
  add_config(split, "split JSON");
  split->add_option("--nx", nx, "grid points per dimension (default 64)");
  split->add_option("--dt-list", c.dt_list, "macro time steps")->delimiter(',');
  split->add_option("--reference-ratio", c.reference_ratio, "finest dt / reference dt")->capture_default_str();
  split->add_option("--exponent", c.exponent, "lower bound on the slope (default 1/13)");
  add_out(split, "split_rates.csv");

  CLI::App* pcc = app.add_subcommand("pcc", "Piecewise-constant-control rate in dt");
  add_config(pcc, "problem JSON (one control per mode)");
  pcc->add_option("--nx", nx, "grid points per dimension (default 64)");
  pcc->add_option("--dt-list", c.dt_list, "macro time steps")->delimiter(',');
  pcc->add_option("--reference-ratio", c.reference_ratio, "finest dt / reference dt")->capture_default_str();
  pcc->add_option("--exponent", c.exponent, "lower bound on the slope (default 1/10)");
  add_out(pcc, "pcc_rates.csv");

  CLI::App* dec = app.add_subcommand("decompose", "Decompose a PSD matrix into directions");
  add_config(dec, "matrix JSON");
  dec->add_option("--max-order", c.max_order, "largest direction component")->capture_default_str();
  add_out(dec, "stdout");

  CLI::App* probe = app.add_subcommand("probe", "Monotonicity, comparison and a-priori probes");
  add_config(probe, "problem JSON");
  add_scheme(probe);
  probe->add_option("--trials", c.trials, "random ordered pairs")->capture_default_str();
  probe->add_option("--seed", c.seed, "random seed")->capture_default_str();
  probe->add_option("--out", c.out_path, "probe report CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    err << "config: " << what << '\n';
    return exit_config;
  }

  const std::pair<CLI::App*, Command> commands[] = {
      {solve, Command::solve},  {rates, Command::rates}, {sw, Command::switching},
      {split, Command::split},  {pcc, Command::pcc},     {dec, Command::decompose},
      {probe, Command::probe}};
  CLI::App* chosen = nullptr;
  for (const auto& [sub, command] : commands)
    if (sub->parsed()) {
      chosen = sub;
      c.command = command;
    }
  auto given = [&](const char* name) {
    const CLI::Option* opt = chosen->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--theta")) c.theta = theta;
  if (given("--nx")) c.nx = nx;
  if (given("--dt")) c.dt = dt;
  if (given("--cfl-factor")) c.cfl_factor = cfl;
  if (given("--stencil")) c.stencil = stencil;
  return execute(c, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("hjb");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hjb::cli
