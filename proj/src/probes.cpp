#include "hjb/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hjb {

namespace {

std::string where(const SpaceTimeGrid& grid, int level, std::size_t node) {
  std::ostringstream os;
  const Vector x = grid.node(node);
  os << "level " << level << " (t=" << grid.time(level) << ") x=(";
  for (int d = 0; d < x.size(); ++d) os << (d ? "," : "") << x[d];
  os << ")";
  return os.str();
}

}  // namespace

ProbeResult monotonicity_probe(const ThetaScheme& scheme, int trials, std::uint64_t seed) {
  const SpaceTimeGrid& grid = scheme.grid();
  const double slack =
      scheme.options().theta == 0.0 ? 1e-12 : std::max(1e-12, 10.0 * scheme.options().tolerance);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_level(1, grid.time_steps());
  std::uniform_int_distribution<std::size_t> pick_node(0, grid.node_count() - 1);

  ProbeResult result;
  for (int trial = 0; trial < trials; ++trial) {
    const int level = pick_level(rng);
    GridFunction u(grid);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 2.0 * unit(rng) - 1.0;
    GridFunction v = u;
    switch (trial % 3) {
      case 0:
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += unit(rng);
        break;
      case 1:
        v[pick_node(rng)] += unit(rng);
        break;
      default:
        break;  // u == v
    }
    const GridFunction su = scheme.step(u, level).first;
    const GridFunction sv = scheme.step(v, level).first;
    for (std::size_t i = 0; i < su.size(); ++i) {
      ++result.checks;
      const double excess = su[i] - sv[i];
      result.worst = std::max(result.worst, excess);
      if (excess > slack && result.passed) {
        result.passed = false;
        std::ostringstream os;
        os << "trial " << trial << ": step(u)=" << su[i] << " > step(v)=" << sv[i] << " at "
           << where(grid, level, i);
        result.witness = os.str();
      }
    }
    if (!result.passed) break;
  }
  return result;
}

ProbeResult comparison_bound_check(const ThetaScheme& scheme, const std::vector<GridFunction>& u,
                                   const std::vector<GridFunction>& v, const Forcing& g1,
                                   const Forcing& g2) {
  if (u.size() != v.size() || u.empty()) throw std::invalid_argument("trajectories differ in length");
  const SpaceTimeGrid& grid = scheme.grid();
  const double mu = scheme.comparison_constants().mu;

  double forcing_gap = 0.0;
  for (int n = 0; n < static_cast<int>(u.size()); ++n) {
    const double t = grid.time(n);
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      const Vector x = grid.node(i);
      forcing_gap = std::max(forcing_gap, g1(t, x) - g2(t, x));
    }
  }
  const double initial_gap = positive_part_norm(u.front() - v.front());

  ProbeResult result;
  for (int n = 0; n < static_cast<int>(u.size()); ++n) {
    const double t = grid.time(n);
    const double bound =
        std::exp(mu * t) * initial_gap + 2.0 * t * std::exp(mu * t) * forcing_gap + 1e-9;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      ++result.checks;
      const double diff = u[n][i] - v[n][i];
      result.worst = std::max(result.worst, diff - bound);
      if (diff > bound && result.passed) {
        result.passed = false;
        std::ostringstream os;
        os << "u-v=" << diff << " exceeds bound " << bound << " at " << where(grid, n, i);
        result.witness = os.str();
      }
    }
  }
  return result;
}

ProbeResult apriori_bounds_check(const std::vector<GridFunction>& trajectory,
                                 const HjbProblem& problem) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  const SpaceTimeGrid& grid = trajectory.front().grid();
  const int levels = static_cast<int>(trajectory.size());

  double lambda = 0.0;
  double source = 0.0;
  const int sampled = problem.coefficients.time_dependent ? levels : 1;
  for (int n = 0; n < sampled; ++n) {
    const double t = grid.time(n);
    for (std::size_t a = 0; a < problem.controls.count(); ++a) {
      for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const LocalCoefficients k = problem.at(a, t, grid.node(i));
        lambda = std::max(lambda, k.reaction);
        source = std::max(source, std::abs(k.source));
      }
    }
  }
  const double initial = sup_norm(trajectory.front());

  ProbeResult result;
  for (int n = 0; n < levels; ++n) {
    const double t = grid.time(n);
    const double bound = std::exp(lambda * t) * (initial + t * source) * 1.05 + 1e-12;
    const double value = sup_norm(trajectory[n]);
    ++result.checks;
    result.worst = std::max(result.worst, value - bound);
    if (value > bound && result.passed) {
      result.passed = false;
      std::ostringstream os;
      os << "|u|_0=" << value << " exceeds bound " << bound << " at level " << n << " (t=" << t
         << ")";
      result.witness = os.str();
    }
  }
  return result;
}

}  // namespace hjb
