#include "helpers.hpp"

#include "hjb/switching.hpp"

#include <doctest.h>

using namespace hjb;
using namespace hjb::test;

namespace {

SchemeOptions explicit_options() {
  SchemeOptions o;
  o.theta = 0.0;
  return o;
}

/// Two controls: drift right with source sin x, drift left with source -sin x.
HjbProblem drift_pair() {
  HjbProblem p = constant_problem(1, {coefficients(1, 0.5, 1.0), coefficients(1, 0.5, -1.0)},
                                  [](const Vector& x) { return std::sin(2.0 * x[0]); });
  p.coefficients.evaluate = [](std::size_t a, double, const Vector& x) {
    return coefficients(1, 0.5, a == 0 ? 1.0 : -1.0, 0.0, a == 0 ? std::sin(x[0]) : -std::sin(x[0]));
  };
  return p;
}

SpaceTimeGrid explicit_grid(const HjbProblem& p, int nx) {
  return SpaceTimeGrid::for_problem(
      p, nx, SpaceTimeGrid::steps_for(p.horizon, 0.9 * max_stable_time_step(p, SpaceTimeGrid::for_problem(p, nx, 1), explicit_options())));
}

}  // namespace

TEST_SUITE("switching") {

TEST_CASE("validation") {
  const HjbProblem p = drift_pair();
  CHECK_THROWS_AS(SwitchingProblem({p, {{0}, {1}}, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SwitchingProblem({p, {{0}}, 0.1}).validate(), std::invalid_argument);
  CHECK_THROWS(SwitchingProblem({p, {{0}, {}}, 0.1}).validate());
  CHECK_NOTHROW(SwitchingProblem({p, {{0}, {1}}, 0.1}).validate());
}

TEST_CASE("project_obstacle") {
  const SpaceTimeGrid g(1, 1.0, 4, 1.0, 1);
  std::vector<GridFunction> v = {GridFunction(g, 1.0), GridFunction(g, 0.0), GridFunction(g, 0.5)};
  project_obstacle(v, 0.1);
  CHECK(v[0][0] == doctest::Approx(0.1));
  CHECK(v[1][0] == 0.0);
  CHECK(v[2][0] == doctest::Approx(0.1));
}

TEST_CASE("identical modes reproduce the single-mode solve") {
  const HjbProblem p = drift_pair();
  const HjbProblem only = restrict_controls(p, {0});
  const SpaceTimeGrid g = explicit_grid(p, 32);
  const SwitchingScheme s({only, {{0}, {0}}, 0.05}, g, explicit_options());
  const SwitchingSolution sol = switching_solve(s);
  const Trajectory scalar = ThetaScheme(only, g, explicit_options()).solve();
  for (int n = 0; n <= g.time_steps(); ++n) {
    CHECK(sup_norm(sol.trajectories[0][n] - scalar.levels[n]) == 0.0);
    CHECK(sup_norm(sol.trajectories[1][n] - scalar.levels[n]) == 0.0);
  }
}

TEST_CASE("large k decouples the modes") {
  const HjbProblem p = drift_pair();
  const SpaceTimeGrid g = explicit_grid(p, 32);
  const double bound = 2.0 * std::exp(0.0) * (1.0 + p.horizon * 1.0) + 1.0;
  const SwitchingSolution sol = SwitchingScheme({p, {{0}, {1}}, 2.0 * bound}, g, explicit_options()).solve();
  for (std::size_t i = 0; i < 2; ++i) {
    const Trajectory alone = ThetaScheme(restrict_controls(p, {i}), g, explicit_options()).solve();
    CHECK(sup_norm(sol.trajectories[i].back() - alone.levels.back()) == 0.0);
  }
}

TEST_CASE("a much cheaper mode pins the other to it plus k") {
  const HjbProblem p = constant_problem(
      1, {coefficients(1, 0.0), coefficients(1, 0.0, 0.0, 0.0, -10.0)}, [](const Vector& x) { return std::sin(x[0]); },
      0.1);
  const SpaceTimeGrid g = SpaceTimeGrid::for_problem(p, 16, 10);
  const SwitchingScheme s({p, {{0}, {1}}, 0.01}, g, explicit_options());
  const std::vector<GridFunction> v0 = {s.mode_scheme(0).initial_data(), s.mode_scheme(1).initial_data()};
  const std::vector<GridFunction> v1 = switching_step(s, v0, 1);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    CHECK(v1[0][i] == doctest::Approx(v1[1][i] + 0.01).epsilon(1e-14));
    CHECK(v1[1][i] == doctest::Approx(v0[1][i] - 0.1).epsilon(1e-14));
  }
}

TEST_CASE("zero data stay zero") {
  const HjbProblem p = constant_problem(1, {coefficients(1, 1.0), coefficients(1, 0.5, 1.0), coefficients(1, 0.0)},
                                        [](const Vector&) { return 0.0; });
  const SwitchingSolution sol =
      SwitchingScheme({p, {{0}, {1}, {2}}, 0.3}, explicit_grid(p, 16), explicit_options()).solve();
  for (const auto& mode : sol.trajectories)
    for (const GridFunction& u : mode) CHECK(sup_norm(u) == 0.0);
}

TEST_CASE("band, ordering and monotonicity in k") {
  const HjbProblem p = drift_pair();
  const SpaceTimeGrid g = explicit_grid(p, 32);
  const KRateResult r = k_rate_experiment(p, {{0}, {1}}, {0.4, 0.2, 0.1, 0.05}, g, explicit_options(), true);
  CHECK(r.max_band_excess <= 1e-9);
  CHECK(r.min_difference >= -1e-12);
  CHECK(r.monotone_in_k);
  for (std::size_t l = 1; l < r.report.levels.size(); ++l)
    CHECK(r.report.levels[l].err_total < r.report.levels[l - 1].err_total);
}

TEST_CASE("halving k once") {
  const HjbProblem p = drift_pair();
  const KRateResult r = k_rate_experiment(p, {{0}, {1}}, {0.2, 0.1}, explicit_grid(p, 64), explicit_options());
  const double ratio = r.report.levels[0].err_total / r.report.levels[1].err_total;
  CHECK(ratio >= std::cbrt(2.0) * 0.9);
}

TEST_CASE("identical modes give a degenerate zero-error fit") {
  const HjbProblem only = restrict_controls(drift_pair(), {0});
  const KRateResult r = k_rate_experiment(only, {{0}, {0}}, {0.4, 0.2, 0.1}, explicit_grid(only, 16), explicit_options());
  CHECK(r.report.fit.degenerate);
  const Verdict v = compare_bounds(r.report, 1.0 / 3.0);
  CHECK(v.pass);
  CHECK(v.reason == "degenerate: zero error");
}

}
