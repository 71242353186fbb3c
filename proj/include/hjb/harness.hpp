#pragma once

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"
#include "hjb/scheme.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace hjb {

/// One refinement level. Errors are signed parts of u - u_h: err_plus is
/// sup (u - u_h)^+, err_minus is sup (u - u_h)^-, err_total is sup |u - u_h|.
struct RateLevel {
  double parameter = 0.0;  // the fitted abscissa: |h|, Δt or k
  double dx = 0.0;
  double dt = 0.0;
  double h = 0.0;
  double err_plus = 0.0;
  double err_minus = 0.0;
  double err_total = 0.0;
  bool failed = false;
  std::string failure;
};

struct FitResult {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
  bool degenerate = false;
  std::string note;
};

struct RateReport {
  std::string parameter_name = "h";
  std::vector<RateLevel> levels;  // sorted by descending parameter
  FitResult fit;
  double theoretical_exponent = std::numeric_limits<double>::quiet_NaN();
};

struct Verdict {
  bool pass = false;
  std::string reason;
};

/// Least-squares slope of log(error) against log(param). Zero errors are
/// excluded (noted); fewer than two positive errors gives a degenerate fit.
FitResult fit_order(const std::vector<double>& params, const std::vector<double>& errors);

/// Errors at or below this are rounding noise.
inline constexpr double zero_error = 1e-12;

/// Sorts levels by descending parameter and fits err_total over the levels
/// that did not fail. If every such error is at most `zero_error` the fit is
/// skipped as degenerate.
void finalize_report(RateReport& report);

/// Passes iff slope >= exponent_lower - slope_tolerance and err_total is
/// nonincreasing along the levels. A degenerate fit whose errors are all
/// below 1e-12 passes as "degenerate: zero error".
Verdict compare_bounds(const RateReport& report, double exponent_lower,
                       double slope_tolerance = 0.05);

/// Reference values on coarse nodes, either from a closed-form solution or
/// from a fine-grid trajectory sharing the torus (resolution ratio a power of 2).
class ReferenceSolution {
 public:
  static ReferenceSolution exact(SpaceTimeFn solution);
  static ReferenceSolution fine_grid(std::vector<GridFunction> trajectory);

  bool is_exact() const { return static_cast<bool>(exact_); }
  /// Reference at `coarse.time(level)` on the nodes of `coarse`. A fine-grid
  /// reference must have a time level at exactly that time.
  GridFunction at(const SpaceTimeGrid& coarse, int level) const;

 private:
  SpaceTimeFn exact_;
  std::vector<GridFunction> fine_;
};

struct RefinementLevel {
  int points_per_dim = 0;
  int time_steps = 0;
};

struct RefinementOptions {
  /// Measure errors over every time level rather than only the final one.
  bool max_over_time = false;
  /// Run levels whose CFL check fails instead of recording them as failed.
  bool force = false;
};

/// Solves each level with `options`, measures signed sup errors against the
/// reference and fits the total error against |h| = sqrt(Δx² + Δt).
RateReport run_refinement(const HjbProblem& problem, const SchemeOptions& options,
                          const std::vector<RefinementLevel>& levels,
                          const ReferenceSolution& reference,
                          const RefinementOptions& refinement = {});

/// Columns level,dx,dt,h,err_plus,err_minus,err_total,slope,verdict. One row
/// per level; a final "fit" row carries the slope and the verdict.
void write_rate_csv(std::ostream& os, const RateReport& report, const Verdict& verdict);

/// Gnuplot script plotting err_total against the parameter on log-log axes.
void write_plot_script(std::ostream& os, const std::string& csv_path, const RateReport& report);

}  // namespace hjb
