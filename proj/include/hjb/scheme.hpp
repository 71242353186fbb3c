#pragma once

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"
#include "hjb/stencil.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace hjb {

struct SchemeOptions {
  double theta = 1.0;
  StencilKind stencil = StencilKind::kushner;
  int bz_max_order = 2;
  /// Sup-norm tolerance of the policy-iteration linear solves.
  double tolerance = 1e-10;
  int max_policy_iterations = 100;
  int max_sweeps = 500000;
  /// Relaxation of the point-iterative sweeps, in (0, 1].
  double relaxation = 1.0;
};

/// Worst left-hand sides of the two CFL inequalities
///   Δt (1-θ)(-c + ΣC) <= 1   and   Δt θ (c - ΣC) <= 1
/// over every node, control and time level.
struct CflReport {
  bool ok = true;
  double explicit_worst = 0.0;
  double implicit_worst = 0.0;
  int explicit_level = 0;
  std::size_t explicit_node = 0;
  std::size_t explicit_control = 0;
  int implicit_level = 0;
  std::size_t implicit_node = 0;
  std::size_t implicit_control = 0;
};

/// lambda = sup (c^a)^+, mu = lambda + 1.
struct ComparisonConstants {
  double lambda = 0.0;
  double mu = 1.0;
};

struct StepReport {
  int level = 0;
  int policy_iterations = 0;
  long sweeps = 0;
  double max_residual = 0.0;
  /// Maximizing control per node, lowest index on ties.
  std::vector<std::size_t> active_controls;
};

/// Extra right-hand side g in S(u) = g, added as Δt g(t_n, x) to each update.
using Forcing = SpaceTimeFn;

struct Trajectory {
  std::vector<GridFunction> levels;
  std::vector<StepReport> reports;
};

/// Discrete operator of every control at one time level, stored row-wise.
struct ControlOperator {
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> column;
  std::vector<double> weight;
  std::vector<double> weight_sum;
  std::vector<double> reaction;
  std::vector<double> source;

  /// -L_h u - c u - f at one node.
  double hamiltonian(const std::vector<double>& u, std::size_t node) const;
};

struct LevelOperator {
  std::vector<ControlOperator> controls;
};

LevelOperator build_level_operator(const HjbProblem& problem, const SpaceTimeGrid& grid,
                                   const SchemeOptions& options, double t);

/// Largest Δt meeting both CFL inequalities on the spatial lattice of `grid`
/// (infinity if unconstrained). Time-dependent coefficients are sampled at
/// 11 equally spaced times.
double max_stable_time_step(const HjbProblem& problem, const SpaceTimeGrid& grid,
                            const SchemeOptions& options);

/// Fully discrete θ-scheme
///   u(t,x) = u(t-Δt,x) - (1-θ)Δt sup_a{-L_h u - c u - f}(t-Δt,x)
///                      -    θ Δt sup_a{-L_h u - c u - f}(t,x).
/// Explicit for θ = 0; otherwise each step is solved by policy iteration.
/// A scheme instance is not safe for concurrent use (it caches operators).
class ThetaScheme {
 public:
  ThetaScheme(HjbProblem problem, SpaceTimeGrid grid, SchemeOptions options = {});

  const HjbProblem& problem() const { return problem_; }
  const SpaceTimeGrid& grid() const { return grid_; }
  const SchemeOptions& options() const { return options_; }

  CflReport cfl_check() const;
  ComparisonConstants comparison_constants() const;

  GridFunction initial_data() const;

  /// θ = 0 update to time level `level` (>= 1) from level-1 values.
  std::pair<GridFunction, StepReport> explicit_step(const GridFunction& prev, int level,
                                                    const Forcing* forcing = nullptr) const;
  /// θ > 0 update solved by policy iteration.
  std::pair<GridFunction, StepReport> implicit_step(const GridFunction& prev, int level,
                                                    const Forcing* forcing = nullptr) const;
  /// Dispatches on θ.
  std::pair<GridFunction, StepReport> step(const GridFunction& prev, int level,
                                           const Forcing* forcing = nullptr) const;

  Trajectory solve(const Forcing* forcing = nullptr) const;
  Trajectory solve_from(GridFunction initial, const Forcing* forcing = nullptr) const;

  const LevelOperator& level_operator(int level) const;

 private:
  GridFunction explicit_part(const GridFunction& prev, int level, const Forcing* forcing,
                             std::vector<std::size_t>* argmax) const;

  HjbProblem problem_;
  SpaceTimeGrid grid_;
  SchemeOptions options_;
  mutable std::map<int, std::shared_ptr<const LevelOperator>> cache_;
};

/// Outcome of a runtime property probe.
struct ProbeResult {
  bool passed = true;
  int checks = 0;
  double worst = 0.0;  // largest violation (or margin) observed
  std::string witness;
};

/// Draws `trials` random ordered pairs u <= v (dense nonnegative perturbations,
/// single-node spikes, and equal pairs in rotation), advances both one step
/// and requires step(u) <= step(v) + slack at every node. Slack is 1e-12 for
/// θ = 0 and max(1e-12, 10 * tolerance) for implicit steps.
ProbeResult monotonicity_probe(const ThetaScheme& scheme, int trials, std::uint64_t seed);

/// Checks u - v <= e^{mu t} |(u0 - v0)^+|_0 + 2 t e^{mu t} |(g1 - g2)^+|_0 + 1e-9
/// at every level, for trajectories solved with forcings g1 and g2.
ProbeResult comparison_bound_check(const ThetaScheme& scheme, const std::vector<GridFunction>& u,
                                   const std::vector<GridFunction>& v, const Forcing& g1,
                                   const Forcing& g2);

/// Checks |u(t)|_0 <= e^{lambda t}(|u0|_0 + t sup|f|_0) * 1.05 at every level.
ProbeResult apriori_bounds_check(const std::vector<GridFunction>& trajectory,
                                 const HjbProblem& problem);

}  // namespace hjb
