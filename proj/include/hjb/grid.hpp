#pragma once

#include "hjb/problem.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace hjb {

using MultiIndex = std::vector<long>;
using Offset = std::vector<int>;

/// Componentwise (i + beta) mod n, always in [0, n).
MultiIndex wrap_index(const MultiIndex& i, const Offset& beta, long n);

/// Uniform periodic lattice Δx Z^N / (n_x Δx) with time levels 0..n_T.
/// Nodes sit at x_j = j Δx, j = 0..n_x-1 in every dimension.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(int dim, double period, int points_per_dim, double horizon, int time_steps);

  /// Grid over the problem's torus. Rejects anisotropic periods.
  static SpaceTimeGrid for_problem(const HjbProblem& problem, int points_per_dim, int time_steps);

  /// Smallest number of time steps whose step does not exceed `target_dt`.
  static int steps_for(double horizon, double target_dt);

  int dim() const { return dim_; }
  int points_per_dim() const { return nx_; }
  int time_steps() const { return nt_; }
  double period() const { return period_; }
  double horizon() const { return horizon_; }
  double dx() const { return period_ / nx_; }
  double dt() const { return horizon_ / nt_; }
  double time(int level) const { return horizon_ * level / nt_; }
  std::size_t node_count() const { return node_count_; }

  std::size_t flatten(const MultiIndex& i) const;
  MultiIndex unflatten(std::size_t flat) const;
  Vector node(std::size_t flat) const;
  std::size_t neighbor(std::size_t flat, const Offset& beta) const;

  /// Same spatial lattice, different time resolution.
  SpaceTimeGrid with_time(double horizon, int time_steps) const;

  bool same_space(const SpaceTimeGrid& other) const {
    return dim_ == other.dim_ && nx_ == other.nx_ && period_ == other.period_;
  }

 private:
  int dim_;
  int nx_;
  int nt_;
  double period_;
  double horizon_;
  std::size_t node_count_;
};

/// One time slice of a grid function. Values are finite by construction
/// through the scheme; `check_finite` enforces it explicitly.
class GridFunction {
 public:
  explicit GridFunction(const SpaceTimeGrid& grid, double fill = 0.0);
  GridFunction(const SpaceTimeGrid& grid, std::vector<double> values);

  static GridFunction sample(const SpaceTimeGrid& grid, const SpaceFn& f);

  const SpaceTimeGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Throws NumericalError with the node coordinates of the first non-finite value.
  void check_finite(const char* context) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

 private:
  SpaceTimeGrid grid_;
  std::vector<double> values_;
};

double sup_norm(const GridFunction& phi);
/// sup of the positive part, i.e. max(0, max values).
double positive_part_norm(const GridFunction& phi);
/// sup of the negative part, i.e. max(0, -min values).
double negative_part_norm(const GridFunction& phi);
/// max over grid edges of |phi(x + e_i Δx) - phi(x)| / Δx, wrapping periodically.
double lipschitz_seminorm(const GridFunction& phi);

/// Coarse-node restriction of a fine-grid function; the fine resolution must
/// be the coarse one times a power of two.
GridFunction restrict_to(const GridFunction& fine, const SpaceTimeGrid& coarse);

/// Columns x_1..x_N,value.
void write_snapshot_csv(std::ostream& os, const GridFunction& phi);
/// Columns t,x_1..x_N,value for levels 0, stride, 2*stride, ... and the last.
void write_trajectory_csv(std::ostream& os, const std::vector<GridFunction>& trajectory,
                          int stride = 1);

/// Shortest round-trip decimal form, used for every CSV number.
std::string format_number(double v);

}  // namespace hjb
