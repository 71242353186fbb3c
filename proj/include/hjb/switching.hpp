#pragma once

#include "hjb/grid.hpp"
#include "hjb/harness.hpp"
#include "hjb/problem.hpp"
#include "hjb/scheme.hpp"

#include <cstddef>
#include <vector>

namespace hjb {

/// Modes i = 1..M, each restricted to a subset A_i of the base controls and
/// coupled through v_i <= min_{j != i} v_j + k. Every mode starts from u0.
struct SwitchingProblem {
  HjbProblem base;
  std::vector<std::vector<std::size_t>> mode_controls;
  double switching_cost = 0.0;

  std::size_t modes() const { return mode_controls.size(); }
  /// Requires k > 0, nonempty subsets whose union is the whole control set.
  void validate() const;
};

struct SwitchingSolution {
  /// trajectories[i][n]: mode i at time level n.
  std::vector<std::vector<GridFunction>> trajectories;

  /// max over levels and nodes of (max_i v_i - min_i v_i).
  double max_band() const;
};

/// v_i <- min(v_i, min_{j != i} v_j + k), Gauss-Seidel in mode order until
/// nothing changes. Returns the number of sweeps.
int project_obstacle(std::vector<GridFunction>& values, double switching_cost);

class SwitchingScheme {
 public:
  SwitchingScheme(SwitchingProblem problem, SpaceTimeGrid grid, SchemeOptions options = {});

  const SwitchingProblem& problem() const { return problem_; }
  const SpaceTimeGrid& grid() const { return grid_; }
  const ThetaScheme& mode_scheme(std::size_t i) const { return schemes_.at(i); }

  /// True when every mode's scheme passes its CFL check.
  bool cfl_ok() const;

  /// Mode candidates from the θ-scheme restricted to A_i, then the obstacle
  /// projection.
  std::vector<GridFunction> step(const std::vector<GridFunction>& prev, int level) const;
  SwitchingSolution solve() const;

 private:
  SwitchingProblem problem_;
  SpaceTimeGrid grid_;
  std::vector<ThetaScheme> schemes_;
};

std::vector<GridFunction> switching_step(const SwitchingScheme& scheme,
                                         const std::vector<GridFunction>& prev, int level);
SwitchingSolution switching_solve(const SwitchingScheme& scheme);

struct KRateResult {
  RateReport report;  // parameter = k; err_* are parts of v_i - u_ref, worst mode
  /// min over k, modes, nodes of v_i - u_ref at the measured times.
  double min_difference = 0.0;
  /// max over k, levels, nodes of (max_i v_i - min_i v_i) - k.
  double max_band_excess = 0.0;
  /// v_i(k1) <= v_i(k2) + 1e-9 for k1 <= k2 at the final time.
  bool monotone_in_k = true;
  double reference_scale = 0.0;
};

/// Runs the switching system for every k on one fixed grid and compares
/// against the scalar scheme with the full control set on the same grid.
/// The error is measured at the final time (or over all times when
/// `max_over_time`). The fit is of err_total against k.
KRateResult k_rate_experiment(const HjbProblem& base,
                              const std::vector<std::vector<std::size_t>>& mode_controls,
                              const std::vector<double>& k_list, const SpaceTimeGrid& grid,
                              const SchemeOptions& options, bool max_over_time = false);

}  // namespace hjb
