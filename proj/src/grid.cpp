#include "hjb/grid.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hjb {

MultiIndex wrap_index(const MultiIndex& i, const Offset& beta, long n) {
  if (i.size() != beta.size()) throw std::invalid_argument("index and offset dimension differ");
  MultiIndex out(i.size());
  for (std::size_t d = 0; d < i.size(); ++d) {
    const long v = (i[d] + beta[d]) % n;
    out[d] = v < 0 ? v + n : v;
  }
  return out;
}

SpaceTimeGrid::SpaceTimeGrid(int dim, double period, int points_per_dim, double horizon,
                             int time_steps)
    : dim_(dim), nx_(points_per_dim), nt_(time_steps), period_(period), horizon_(horizon) {
  if (dim < 1) throw std::invalid_argument("grid dimension must be positive");
  if (points_per_dim < 3) throw std::invalid_argument("need at least 3 points per dimension");
  if (time_steps < 1) throw std::invalid_argument("need at least one time step");
  if (!(period > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("period and horizon must be positive");
  node_count_ = 1;
  for (int d = 0; d < dim; ++d) node_count_ *= static_cast<std::size_t>(nx_);
}

SpaceTimeGrid SpaceTimeGrid::for_problem(const HjbProblem& problem, int points_per_dim,
                                         int time_steps) {
  problem.validate();
  for (int d = 1; d < problem.dim; ++d) {
    if (std::abs(problem.period[d] - problem.period[0]) > 1e-12 * problem.period[0])
      throw std::invalid_argument("anisotropic periods are not supported (uniform Δx required)");
  }
  return SpaceTimeGrid(problem.dim, problem.period[0], points_per_dim, problem.horizon,
                       time_steps);
}

int SpaceTimeGrid::steps_for(double horizon, double target_dt) {
  if (!(target_dt > 0.0)) throw std::invalid_argument("target time step must be positive");
  return std::max(1, static_cast<int>(std::ceil(horizon / target_dt - 1e-9)));
}

std::size_t SpaceTimeGrid::flatten(const MultiIndex& i) const {
  std::size_t flat = 0;
  for (int d = dim_ - 1; d >= 0; --d) flat = flat * nx_ + static_cast<std::size_t>(i[d]);
  return flat;
}

MultiIndex SpaceTimeGrid::unflatten(std::size_t flat) const {
  MultiIndex i(dim_);
  for (int d = 0; d < dim_; ++d) {
    i[d] = static_cast<long>(flat % nx_);
    flat /= nx_;
  }
  return i;
}

Vector SpaceTimeGrid::node(std::size_t flat) const {
  Vector x(dim_);
  for (int d = 0; d < dim_; ++d) {
    x[d] = static_cast<double>(flat % nx_) * dx();
    flat /= nx_;
  }
  return x;
}

std::size_t SpaceTimeGrid::neighbor(std::size_t flat, const Offset& beta) const {
  return flatten(wrap_index(unflatten(flat), beta, nx_));
}

SpaceTimeGrid SpaceTimeGrid::with_time(double horizon, int time_steps) const {
  return SpaceTimeGrid(dim_, period_, nx_, horizon, time_steps);
}

GridFunction::GridFunction(const SpaceTimeGrid& grid, double fill)
    : grid_(grid), values_(grid.node_count(), fill) {}

GridFunction::GridFunction(const SpaceTimeGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count())
    throw std::invalid_argument("value count does not match the grid");
}

GridFunction GridFunction::sample(const SpaceTimeGrid& grid, const SpaceFn& f) {
  GridFunction out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(grid.node(i));
  return out;
}

void GridFunction::check_finite(const char* context) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream os;
      os << context << ": non-finite value at node x=(";
      const Vector x = grid_.node(i);
      for (int d = 0; d < x.size(); ++d) os << (d ? "," : "") << x[d];
      os << ")";
      throw NumericalError(os.str());
    }
  }
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (other.size() != size()) throw std::invalid_argument("grid functions differ in size");
  for (std::size_t i = 0; i < size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (other.size() != size()) throw std::invalid_argument("grid functions differ in size");
  for (std::size_t i = 0; i < size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double sup_norm(const GridFunction& phi) {
  double m = 0.0;
  for (double v : phi.values()) m = std::max(m, std::abs(v));
  return m;
}

double positive_part_norm(const GridFunction& phi) {
  double m = 0.0;
  for (double v : phi.values()) m = std::max(m, v);
  return m;
}

double negative_part_norm(const GridFunction& phi) {
  double m = 0.0;
  for (double v : phi.values()) m = std::max(m, -v);
  return m;
}

double lipschitz_seminorm(const GridFunction& phi) {
  const SpaceTimeGrid& g = phi.grid();
  double m = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (int d = 0; d < g.dim(); ++d) {
      Offset e(g.dim(), 0);
      e[d] = 1;
      m = std::max(m, std::abs(phi[g.neighbor(i, e)] - phi[i]) / g.dx());
    }
  }
  return m;
}

GridFunction restrict_to(const GridFunction& fine, const SpaceTimeGrid& coarse) {
  const SpaceTimeGrid& f = fine.grid();
  if (f.dim() != coarse.dim() || f.period() != coarse.period())
    throw std::invalid_argument("grids describe different tori");
  const int ratio = f.points_per_dim() / coarse.points_per_dim();
  if (ratio < 1 || ratio * coarse.points_per_dim() != f.points_per_dim() ||
      (ratio & (ratio - 1)) != 0)
    throw std::invalid_argument("fine resolution must be a power-of-two multiple of the coarse one");
  GridFunction out(coarse);
  for (std::size_t i = 0; i < out.size(); ++i) {
    MultiIndex idx = coarse.unflatten(i);
    for (long& v : idx) v *= ratio;
    out[i] = fine[f.flatten(idx)];
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_snapshot_csv(std::ostream& os, const GridFunction& phi) {
  const SpaceTimeGrid& g = phi.grid();
  for (int d = 0; d < g.dim(); ++d) os << "x_" << d + 1 << ',';
  os << "value\n";
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const Vector x = g.node(i);
    for (int d = 0; d < g.dim(); ++d) os << format_number(x[d]) << ',';
    os << format_number(phi[i]) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const std::vector<GridFunction>& trajectory,
                          int stride) {
  if (trajectory.empty()) return;
  stride = std::max(stride, 1);
  const SpaceTimeGrid& g = trajectory.front().grid();
  os << "t,";
  for (int d = 0; d < g.dim(); ++d) os << "x_" << d + 1 << ',';
  os << "value\n";
  const int last = static_cast<int>(trajectory.size()) - 1;
  for (int n = 0; n <= last; ++n) {
    if (n % stride != 0 && n != last) continue;
    const std::string t = format_number(g.time(n));
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const Vector x = g.node(i);
      os << t << ',';
      for (int d = 0; d < g.dim(); ++d) os << format_number(x[d]) << ',';
      os << format_number(trajectory[n][i]) << '\n';
    }
  }
}

}  // namespace hjb
