#include "hjb/switching.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace hjb {

void SwitchingProblem::validate() const {
  base.validate();
  if (!(switching_cost > 0.0)) throw std::invalid_argument("switching cost must be positive");
  if (mode_controls.empty()) throw std::invalid_argument("at least one mode is required");
  std::set<std::size_t> covered;
  for (const auto& subset : mode_controls) {
    if (subset.empty()) throw std::invalid_argument("mode control subsets must be nonempty");
    for (std::size_t a : subset) {
      if (a >= base.controls.count()) throw std::out_of_range("mode refers to an unknown control");
      covered.insert(a);
    }
  }
  if (covered.size() != base.controls.count())
    throw std::invalid_argument("mode control subsets must cover the control set");
}

double SwitchingSolution::max_band() const {
  double band = 0.0;
  if (trajectories.empty()) return band;
  for (std::size_t n = 0; n < trajectories.front().size(); ++n) {
    for (std::size_t x = 0; x < trajectories.front()[n].size(); ++x) {
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& mode : trajectories) {
        hi = std::max(hi, mode[n][x]);
        lo = std::min(lo, mode[n][x]);
      }
      band = std::max(band, hi - lo);
    }
  }
  return band;
}

int project_obstacle(std::vector<GridFunction>& values, double switching_cost) {
  const std::size_t modes = values.size();
  int sweeps = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    ++sweeps;
    for (std::size_t i = 0; i < modes; ++i) {
      for (std::size_t x = 0; x < values[i].size(); ++x) {
        double obstacle = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < modes; ++j)
          if (j != i) obstacle = std::min(obstacle, values[j][x] + switching_cost);
        if (obstacle < values[i][x]) {
          values[i][x] = obstacle;
          changed = true;
        }
      }
    }
  }
  return sweeps;
}

SwitchingScheme::SwitchingScheme(SwitchingProblem problem, SpaceTimeGrid grid,
                                 SchemeOptions options)
    : problem_(std::move(problem)), grid_(std::move(grid)) {
  problem_.validate();
  schemes_.reserve(problem_.modes());
  for (const auto& subset : problem_.mode_controls)
    schemes_.emplace_back(restrict_controls(problem_.base, subset), grid_, options);
}

bool SwitchingScheme::cfl_ok() const {
  return std::all_of(schemes_.begin(), schemes_.end(),
                     [](const ThetaScheme& s) { return s.cfl_check().ok; });
}

std::vector<GridFunction> SwitchingScheme::step(const std::vector<GridFunction>& prev,
                                                int level) const {
  if (prev.size() != schemes_.size()) throw std::invalid_argument("one grid function per mode expected");
  std::vector<GridFunction> next;
  next.reserve(prev.size());
  for (std::size_t i = 0; i < schemes_.size(); ++i) next.push_back(schemes_[i].step(prev[i], level).first);
  project_obstacle(next, problem_.switching_cost);
  return next;
}

SwitchingSolution SwitchingScheme::solve() const {
  SwitchingSolution sol;
  const GridFunction u0 = GridFunction::sample(grid_, problem_.base.initial);
  u0.check_finite("initial data");
  sol.trajectories.assign(schemes_.size(), std::vector<GridFunction>{u0});
  std::vector<GridFunction> current(schemes_.size(), u0);
  for (int n = 1; n <= grid_.time_steps(); ++n) {
    current = step(current, n);
    for (std::size_t i = 0; i < current.size(); ++i) sol.trajectories[i].push_back(current[i]);
  }
  return sol;
}

std::vector<GridFunction> switching_step(const SwitchingScheme& scheme,
                                         const std::vector<GridFunction>& prev, int level) {
  return scheme.step(prev, level);
}

SwitchingSolution switching_solve(const SwitchingScheme& scheme) { return scheme.solve(); }

KRateResult k_rate_experiment(const HjbProblem& base,
                              const std::vector<std::vector<std::size_t>>& mode_controls,
                              const std::vector<double>& k_list, const SpaceTimeGrid& grid,
                              const SchemeOptions& options, bool max_over_time) {
  if (k_list.empty()) throw std::invalid_argument("k list must not be empty");
  const ThetaScheme scalar(base, grid, options);
  const Trajectory reference = scalar.solve();

  KRateResult result;
  result.report.parameter_name = "k";
  result.min_difference = std::numeric_limits<double>::infinity();
  for (const GridFunction& u : reference.levels)
    result.reference_scale = std::max(result.reference_scale, sup_norm(u));

  std::vector<std::pair<double, std::vector<GridFunction>>> finals;
  const int first = max_over_time ? 0 : grid.time_steps();
  for (double k : k_list) {
    const SwitchingScheme scheme(SwitchingProblem{base, mode_controls, k}, grid, options);
    const SwitchingSolution sol = scheme.solve();
    RateLevel level;
    level.parameter = k;
    level.h = k;
    level.dx = grid.dx();
    level.dt = grid.dt();
    for (const auto& mode : sol.trajectories) {
      for (int n = first; n <= grid.time_steps(); ++n) {
        const GridFunction diff = mode[n] - reference.levels[n];
        level.err_plus = std::max(level.err_plus, positive_part_norm(diff));
        level.err_minus = std::max(level.err_minus, negative_part_norm(diff));
        level.err_total = std::max(level.err_total, sup_norm(diff));
        for (double d : diff.values()) result.min_difference = std::min(result.min_difference, d);
      }
    }
    result.max_band_excess = std::max(result.max_band_excess, sol.max_band() - k);
    std::vector<GridFunction> last;
    for (const auto& mode : sol.trajectories) last.push_back(mode.back());
    finals.emplace_back(k, std::move(last));
    result.report.levels.push_back(level);
  }

  std::sort(finals.begin(), finals.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t s = 1; s < finals.size(); ++s) {
    for (std::size_t i = 0; i < finals[s].second.size(); ++i) {
      const GridFunction diff = finals[s - 1].second[i] - finals[s].second[i];
      if (positive_part_norm(diff) > 1e-9) result.monotone_in_k = false;
    }
  }
  finalize_report(result.report);
  return result;
}

}  // namespace hjb
