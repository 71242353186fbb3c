#include "hjb/scheme.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hjb {

namespace {

std::string node_location(const SpaceTimeGrid& grid, std::size_t node) {
  std::ostringstream os;
  const Vector x = grid.node(node);
  os << "x=(";
  for (int d = 0; d < x.size(); ++d) os << (d ? "," : "") << x[d];
  os << ")";
  return os.str();
}

// Lowest-index maximizer of the Hamiltonian at one node.
std::pair<std::size_t, double> best_control(const LevelOperator& op, const std::vector<double>& u,
                                            std::size_t node) {
  std::size_t best = 0;
  double value = op.controls[0].hamiltonian(u, node);
  for (std::size_t a = 1; a < op.controls.size(); ++a) {
    const double h = op.controls[a].hamiltonian(u, node);
    if (h > value) {
      value = h;
      best = a;
    }
  }
  return {best, value};
}

}  // namespace

double ControlOperator::hamiltonian(const std::vector<double>& u, std::size_t node) const {
  const double center = u[node];
  double lh = 0.0;
  for (std::size_t k = row_start[node]; k < row_start[node + 1]; ++k)
    lh += weight[k] * (u[column[k]] - center);
  return -lh - reaction[node] * center - source[node];
}

LevelOperator build_level_operator(const HjbProblem& problem, const SpaceTimeGrid& grid,
                                   const SchemeOptions& options, double t) {
  LevelOperator out;
  const std::size_t nodes = grid.node_count();
  out.controls.resize(problem.controls.count());
  for (std::size_t a = 0; a < problem.controls.count(); ++a) {
    ControlOperator& op = out.controls[a];
    op.row_start.reserve(nodes + 1);
    op.row_start.push_back(0);
    op.weight_sum.resize(nodes);
    op.reaction.resize(nodes);
    op.source.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const Vector x = grid.node(i);
      const LocalCoefficients k = problem.at(a, t, x);
      if (!std::isfinite(k.reaction) || !std::isfinite(k.source) || !k.sigma.allFinite() ||
          !k.drift.allFinite())
        throw NumericalError("non-finite coefficient for control " + std::to_string(a) + " at " +
                             node_location(grid, i));
      const SpatialStencil st =
          operator_stencil(options.stencil, k.diffusion(), k.drift, grid.dx(), options.bz_max_order);
      double sum = 0.0;
      for (const auto& [beta, w] : st.entries()) {
        op.column.push_back(grid.neighbor(i, beta));
        op.weight.push_back(w);
        sum += w;
      }
      op.row_start.push_back(op.column.size());
      op.weight_sum[i] = sum;
      op.reaction[i] = k.reaction;
      op.source[i] = k.source;
    }
  }
  return out;
}

double max_stable_time_step(const HjbProblem& problem, const SpaceTimeGrid& grid,
                            const SchemeOptions& options) {
  const double theta = options.theta;
  const int samples = problem.coefficients.time_dependent ? 11 : 1;
  double limit = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double t = samples > 1 ? problem.horizon * s / (samples - 1) : 0.0;
    const LevelOperator op = build_level_operator(problem, grid, options, t);
    for (const ControlOperator& c : op.controls) {
      for (std::size_t i = 0; i < c.weight_sum.size(); ++i) {
        const double growth = c.weight_sum[i] - c.reaction[i];
        if ((1.0 - theta) * growth > 0.0) limit = std::min(limit, 1.0 / ((1.0 - theta) * growth));
        if (theta * -growth > 0.0) limit = std::min(limit, 1.0 / (theta * -growth));
      }
    }
  }
  return limit;
}

ThetaScheme::ThetaScheme(HjbProblem problem, SpaceTimeGrid grid, SchemeOptions options)
    : problem_(std::move(problem)), grid_(std::move(grid)), options_(options) {
  problem_.validate();
  if (!(options_.theta >= 0.0 && options_.theta <= 1.0))
    throw std::invalid_argument("theta must lie in [0, 1]");
  if (grid_.dim() != problem_.dim) throw std::invalid_argument("grid and problem dimension differ");
  if (!(options_.relaxation > 0.0 && options_.relaxation <= 1.0))
    throw std::invalid_argument("relaxation must lie in (0, 1]");
  if (!(options_.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

const LevelOperator& ThetaScheme::level_operator(int level) const {
  const int key = problem_.coefficients.time_dependent ? level : 0;
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;
  // Stepping only ever needs the current and the previous level.
  while (cache_.size() >= 2) cache_.erase(cache_.begin());
  auto op = std::make_shared<const LevelOperator>(
      build_level_operator(problem_, grid_, options_, grid_.time(key)));
  return *cache_.emplace(key, std::move(op)).first->second;
}

CflReport ThetaScheme::cfl_check() const {
  CflReport report;
  const double theta = options_.theta;
  const double dt = grid_.dt();
  const int last = problem_.coefficients.time_dependent ? grid_.time_steps() : 0;
  report.explicit_worst = -std::numeric_limits<double>::infinity();
  report.implicit_worst = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= last; ++n) {
    const LevelOperator& op = level_operator(n);
    for (std::size_t a = 0; a < op.controls.size(); ++a) {
      const ControlOperator& c = op.controls[a];
      for (std::size_t i = 0; i < c.weight_sum.size(); ++i) {
        const double growth = c.weight_sum[i] - c.reaction[i];
        const double lhs1 = dt * (1.0 - theta) * growth;
        const double lhs2 = dt * theta * -growth;
        if (lhs1 > report.explicit_worst) {
          report.explicit_worst = lhs1;
          report.explicit_level = n;
          report.explicit_node = i;
          report.explicit_control = a;
        }
        if (lhs2 > report.implicit_worst) {
          report.implicit_worst = lhs2;
          report.implicit_level = n;
          report.implicit_node = i;
          report.implicit_control = a;
        }
      }
    }
  }
  report.ok = report.explicit_worst <= 1.0 + 1e-12 && report.implicit_worst <= 1.0 + 1e-12;
  return report;
}

ComparisonConstants ThetaScheme::comparison_constants() const {
  ComparisonConstants k;
  const int last = problem_.coefficients.time_dependent ? grid_.time_steps() : 0;
  for (int n = 0; n <= last; ++n) {
    for (const ControlOperator& c : level_operator(n).controls)
      for (double r : c.reaction) k.lambda = std::max(k.lambda, r);
  }
  k.mu = k.lambda + 1.0;
  return k;
}

GridFunction ThetaScheme::initial_data() const {
  GridFunction u0 = GridFunction::sample(grid_, problem_.initial);
  u0.check_finite("initial data");
  return u0;
}

GridFunction ThetaScheme::explicit_part(const GridFunction& prev, int level, const Forcing* forcing,
                                        std::vector<std::size_t>* argmax) const {
  if (level < 1 || level > grid_.time_steps())
    throw std::out_of_range("time level " + std::to_string(level) + " out of range");
  if (!prev.grid().same_space(grid_)) throw std::invalid_argument("grid function on a different lattice");
  const double dt = grid_.dt();
  const double weight = (1.0 - options_.theta) * dt;
  GridFunction out(grid_, prev.values());
  if (argmax) argmax->assign(prev.size(), 0);
  if (weight > 0.0) {
    const LevelOperator& op = level_operator(level - 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto [best, value] = best_control(op, prev.values(), i);
      out[i] -= weight * value;
      if (argmax) (*argmax)[i] = best;
    }
  }
  if (forcing) {
    const double t = grid_.time(level);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt * (*forcing)(t, grid_.node(i));
  }
  return out;
}

std::pair<GridFunction, StepReport> ThetaScheme::explicit_step(const GridFunction& prev, int level,
                                                               const Forcing* forcing) const {
  if (options_.theta != 0.0) throw std::logic_error("explicit_step requires theta = 0");
  StepReport report;
  report.level = level;
  GridFunction out = explicit_part(prev, level, forcing, &report.active_controls);
  out.check_finite("explicit step");
  return {std::move(out), std::move(report)};
}

std::pair<GridFunction, StepReport> ThetaScheme::implicit_step(const GridFunction& prev, int level,
                                                               const Forcing* forcing) const {
  const double theta = options_.theta;
  if (!(theta > 0.0)) throw std::logic_error("implicit_step requires theta > 0");
  const GridFunction rhs = explicit_part(prev, level, forcing, nullptr);
  const LevelOperator& op = level_operator(level);
  const double k = theta * grid_.dt();
  const double omega = options_.relaxation;
  const std::size_t nodes = grid_.node_count();

  std::vector<double> u = prev.values();
  std::vector<std::size_t> policy(nodes);
  for (std::size_t i = 0; i < nodes; ++i) policy[i] = best_control(op, u, i).first;

  StepReport report;
  report.level = level;
  bool converged = false;
  for (int iteration = 1; iteration <= options_.max_policy_iterations; ++iteration) {
    report.policy_iterations = iteration;

    // Linear system for the frozen policy, by point-iterative sweeps.
    for (long sweep = 0;; ++sweep) {
      if (sweep >= options_.max_sweeps)
        throw NumericalError("linear solve did not converge within " +
                             std::to_string(options_.max_sweeps) + " sweeps at level " +
                             std::to_string(level));
      double largest = 0.0;
      for (std::size_t i = 0; i < nodes; ++i) {
        const ControlOperator& c = op.controls[policy[i]];
        const double diag = 1.0 + k * (c.weight_sum[i] - c.reaction[i]);
        if (!(diag > 0.0))
          throw NumericalError("singular diagonal at " + node_location(grid_, i) + " (level " +
                               std::to_string(level) + ")");
        double off = 0.0;
        for (std::size_t e = c.row_start[i]; e < c.row_start[i + 1]; ++e)
          off += c.weight[e] * u[c.column[e]];
        const double residual = diag * u[i] - rhs[i] - k * (off + c.source[i]);
        largest = std::max(largest, std::abs(residual));
        u[i] -= omega * residual / diag;
      }
      ++report.sweeps;
      if (!std::isfinite(largest))
        throw NumericalError("non-finite iterate in implicit step at level " + std::to_string(level));
      if (largest <= options_.tolerance) break;
    }

    // Policy improvement; switch only on a strict gain so that floating-point
    // near-ties cannot cycle.
    bool changed = false;
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto [best, value] = best_control(op, u, i);
      const double current = op.controls[policy[i]].hamiltonian(u, i);
      if (best != policy[i] && value > current + 1e-12 * (1.0 + std::abs(value))) {
        policy[i] = best;
        changed = true;
      }
    }
    if (!changed) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("policy iteration exceeded " +
                         std::to_string(options_.max_policy_iterations) + " iterations at level " +
                         std::to_string(level));

  report.active_controls.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto [best, value] = best_control(op, u, i);
    report.active_controls[i] = best;
    report.max_residual = std::max(report.max_residual, std::abs(u[i] + k * value - rhs[i]));
  }
  GridFunction out(grid_, std::move(u));
  out.check_finite("implicit step");
  return {std::move(out), std::move(report)};
}

std::pair<GridFunction, StepReport> ThetaScheme::step(const GridFunction& prev, int level,
                                                      const Forcing* forcing) const {
  return options_.theta == 0.0 ? explicit_step(prev, level, forcing)
                               : implicit_step(prev, level, forcing);
}

Trajectory ThetaScheme::solve(const Forcing* forcing) const {
  return solve_from(initial_data(), forcing);
}

Trajectory ThetaScheme::solve_from(GridFunction initial, const Forcing* forcing) const {
  Trajectory traj;
  traj.levels.reserve(grid_.time_steps() + 1);
  traj.levels.push_back(std::move(initial));
  for (int n = 1; n <= grid_.time_steps(); ++n) {
    auto [next, report] = step(traj.levels.back(), n, forcing);
    traj.levels.push_back(std::move(next));
    traj.reports.push_back(std::move(report));
  }
  return traj;
}

}  // namespace hjb
