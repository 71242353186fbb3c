#include "hjb/harness.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hjb {

FitResult fit_order(const std::vector<double>& params, const std::vector<double>& errors) {
  if (params.size() != errors.size()) throw std::invalid_argument("params and errors differ in length");
  FitResult fit;
  std::vector<double> lx;
  std::vector<double> ly;
  int zeros = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] > 0.0)) throw std::invalid_argument("parameters must be positive");
    if (errors[i] < 0.0) throw std::invalid_argument("errors must be nonnegative");
    if (errors[i] == 0.0) {
      ++zeros;
      continue;
    }
    lx.push_back(std::log(params[i]));
    ly.push_back(std::log(errors[i]));
  }
  if (zeros > 0) fit.note = std::to_string(zeros) + " zero error(s) excluded";
  fit.points = static_cast<int>(lx.size());
  if (lx.size() < 2) {
    fit.degenerate = true;
    fit.note = zeros == static_cast<int>(params.size()) ? "degenerate: zero error"
                                                         : "degenerate: fewer than two positive errors";
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) {
    fit.degenerate = true;
    fit.note = "degenerate: identical parameters";
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

void finalize_report(RateReport& report) {
  std::stable_sort(report.levels.begin(), report.levels.end(),
                   [](const RateLevel& a, const RateLevel& b) { return a.parameter > b.parameter; });
  std::vector<double> params;
  std::vector<double> errors;
  for (const RateLevel& l : report.levels) {
    if (l.failed) continue;
    params.push_back(l.parameter);
    errors.push_back(l.err_total);
  }
  if (params.size() < 2) {
    report.fit = FitResult{};
    report.fit.degenerate = true;
    report.fit.note = "inconclusive: fewer than two surviving levels";
    return;
  }
  if (std::all_of(errors.begin(), errors.end(), [](double e) { return e <= zero_error; })) {
    report.fit = FitResult{};
    report.fit.degenerate = true;
    report.fit.note = "degenerate: zero error";
    return;
  }
  report.fit = fit_order(params, errors);
}

Verdict compare_bounds(const RateReport& report, double exponent_lower, double slope_tolerance) {
  Verdict v;
  std::vector<const RateLevel*> alive;
  for (const RateLevel& l : report.levels)
    if (!l.failed) alive.push_back(&l);
  if (alive.size() < 2) {
    v.reason = "inconclusive: fewer than two surviving levels";
    return v;
  }
  if (report.fit.degenerate) {
    const bool all_zero = std::all_of(alive.begin(), alive.end(),
                                      [](const RateLevel* l) { return l->err_total <= 1e-12; });
    v.pass = all_zero;
    v.reason = all_zero ? "degenerate: zero error" : report.fit.note;
    return v;
  }
  for (std::size_t i = 1; i < alive.size(); ++i) {
    if (alive[i]->err_total > alive[i - 1]->err_total) {
      v.reason = "errors not monotone across levels";
      return v;
    }
  }
  if (report.fit.slope < exponent_lower - slope_tolerance) {
    v.reason = "slope " + format_number(report.fit.slope) + " below " +
               format_number(exponent_lower) + " - " + format_number(slope_tolerance);
    return v;
  }
  v.pass = true;
  v.reason = "slope " + format_number(report.fit.slope) + " >= " + format_number(exponent_lower) +
             " - " + format_number(slope_tolerance);
  return v;
}

ReferenceSolution ReferenceSolution::exact(SpaceTimeFn solution) {
  ReferenceSolution r;
  r.exact_ = std::move(solution);
  return r;
}

ReferenceSolution ReferenceSolution::fine_grid(std::vector<GridFunction> trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("empty reference trajectory");
  ReferenceSolution r;
  r.fine_ = std::move(trajectory);
  return r;
}

GridFunction ReferenceSolution::at(const SpaceTimeGrid& coarse, int level) const {
  const double t = coarse.time(level);
  if (exact_) {
    GridFunction out(coarse);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = exact_(t, coarse.node(i));
    return out;
  }
  const SpaceTimeGrid& fine = fine_.front().grid();
  const int steps = static_cast<int>(fine_.size()) - 1;
  const double position = t / fine.horizon() * steps;
  const int m = static_cast<int>(std::lround(position));
  if (m < 0 || m > steps || std::abs(position - m) > 1e-9)
    throw std::invalid_argument("reference has no time level at t=" + format_number(t));
  return restrict_to(fine_[m], coarse);
}

RateReport run_refinement(const HjbProblem& problem, const SchemeOptions& options,
                          const std::vector<RefinementLevel>& levels,
                          const ReferenceSolution& reference,
                          const RefinementOptions& refinement) {
  RateReport report;
  report.parameter_name = "h";
  for (const RefinementLevel& spec : levels) {
    const SpaceTimeGrid grid =
        SpaceTimeGrid::for_problem(problem, spec.points_per_dim, spec.time_steps);
    RateLevel level;
    level.dx = grid.dx();
    level.dt = grid.dt();
    level.h = std::sqrt(level.dx * level.dx + level.dt);
    level.parameter = level.h;
    try {
      const ThetaScheme scheme(problem, grid, options);
      const CflReport cfl = scheme.cfl_check();
      if (!cfl.ok && !refinement.force) {
        level.failed = true;
        level.failure = "CFL violated (" + format_number(cfl.explicit_worst) + ", " +
                        format_number(cfl.implicit_worst) + ")";
      } else {
        const Trajectory traj = scheme.solve();
        const int first = refinement.max_over_time ? 0 : grid.time_steps();
        for (int n = first; n <= grid.time_steps(); ++n) {
          const GridFunction diff = reference.at(grid, n) - traj.levels[n];
          level.err_plus = std::max(level.err_plus, positive_part_norm(diff));
          level.err_minus = std::max(level.err_minus, negative_part_norm(diff));
          level.err_total = std::max(level.err_total, sup_norm(diff));
        }
      }
    } catch (const NumericalError& e) {
      level.failed = true;
      level.failure = e.what();
    }
    report.levels.push_back(level);
  }
  finalize_report(report);
  return report;
}

void write_rate_csv(std::ostream& os, const RateReport& report, const Verdict& verdict) {
  os << "level,dx,dt,h,err_plus,err_minus,err_total,slope,verdict\n";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const RateLevel& l = report.levels[i];
    os << i << ',' << format_number(l.dx) << ',' << format_number(l.dt) << ','
       << format_number(l.parameter) << ',';
    if (l.failed) {
      os << ",,,,failed\n";
    } else {
      os << format_number(l.err_plus) << ',' << format_number(l.err_minus) << ','
         << format_number(l.err_total) << ",,\n";
    }
  }
  os << "fit,,,,,,,";
  if (report.fit.degenerate)
    os << "degenerate";
  else
    os << format_number(report.fit.slope);
  os << ',' << (verdict.pass ? "pass" : "fail") << '\n';
}

void write_plot_script(std::ostream& os, const std::string& csv_path, const RateReport& report) {
  os << "# gnuplot script: error against " << report.parameter_name << "\n"
     << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set key left top\n"
     << "set xlabel '" << report.parameter_name << "'\n"
     << "set ylabel 'sup error'\n"
     << "set title 'fitted slope ";
  if (report.fit.degenerate)
    os << "n/a";
  else
    os << format_number(report.fit.slope);
  os << "'\n"
     << "plot '" << csv_path << "' every ::1 using 4:7 with linespoints title 'err_total', \\\n"
     << "     '" << csv_path << "' every ::1 using 4:5 with linespoints title 'err_plus', \\\n"
     << "     '" << csv_path << "' every ::1 using 4:6 with linespoints title 'err_minus'\n";
}

}  // namespace hjb
