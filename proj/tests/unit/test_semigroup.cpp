#include "helpers.hpp"

#include "hjb/harness.hpp"
#include "hjb/semigroup.hpp"

#include <doctest.h>

#include <memory>
#include <random>

using namespace hjb;
using namespace hjb::test;

namespace {

DiffusionControl member(double a, double f = 0.0) { return {Matrix::Constant(1, 1, a), f}; }

SplitProblem split_problem(ControlFamily first, ControlFamily second) {
  SplitProblem sp;
  sp.dim = 1;
  sp.period = two_pi;
  sp.horizon = 1.0;
  sp.initial = [](const Vector& x) { return std::sin(x[0]); };
  sp.first = std::move(first);
  sp.second = std::move(second);
  return sp;
}

SpaceTimeGrid space(int nx) { return SpaceTimeGrid(1, two_pi, nx, 1.0, 1); }

GridFunction sine_on(const SpaceTimeGrid& g) {
  return GridFunction::sample(g, [](const Vector& x) { return std::sin(x[0]); });
}

}  // namespace

TEST_SUITE("semigroup") {

TEST_CASE("sub-semigroups") {
  const SpaceTimeGrid g = space(64);
  const GridFunction phi = sine_on(g);
  const SplitProblem sp = split_problem({member(0.0)}, {member(0.0, 1.0)});
  SUBCASE("zero operator is the identity") {
    CHECK(sup_norm(sub_semigroup_apply(family_problem(sp, sp.first), phi, 0.1, 4) - phi) == 0.0);
  }
  SUBCASE("source only adds dt") {
    const GridFunction out = sub_semigroup_apply(family_problem(sp, sp.second), phi, 0.1, 4);
    CHECK(sup_norm(out - phi - GridFunction(g, 0.1)) <= 1e-12);
  }
  SUBCASE("heat flow within the inner-scheme error") {
    const SplitProblem heat = split_problem({member(0.5)}, {member(0.0)});
    const GridFunction out = sub_semigroup_apply(family_problem(heat, heat.first), phi, 0.1, 20);
    const GridFunction exact = std::exp(-0.05) * phi;
    CHECK(sup_norm(out - exact) <= 1e-3);
  }
  SUBCASE("time-dependent problems are rejected") {
    HjbProblem p = family_problem(sp, sp.first);
    p.coefficients.time_dependent = true;
    CHECK_THROWS_AS(SubSemigroup(p, g, 0.1, 2), std::invalid_argument);
  }
}

TEST_CASE("splitting") {
  const SpaceTimeGrid g = space(64);
  const GridFunction phi = sine_on(g);
  SUBCASE("zero second family equals the first sub-step") {
    const SplitProblem sp = split_problem({member(0.3), member(0.6, -0.2)}, {member(0.0)});
    const GridFunction a = splitting_step(sp, phi, 0.1, 8);
    const GridFunction b = sub_semigroup_apply(family_problem(sp, sp.first), phi, 0.1, 8);
    CHECK(sup_norm(a - b) <= 1e-12);
  }
  SUBCASE("commuting linear flows add no error beyond the inner scheme") {
    const SplitProblem sp = split_problem({member(0.3)}, {member(0.2)});
    const double dt = 0.1;
    const int inner = 10;
    const SplittingStepper split(sp, g, dt, inner);
    const SubSemigroup direct(combined_problem(sp), g, dt, inner);
    GridFunction u = phi, v = phi;
    for (int n = 0; n < 10; ++n) {
      u = split.step(u);
      v = direct.apply(v);
    }
    const GridFunction exact = std::exp(-0.5) * phi;
    CHECK(sup_norm(u - exact) <= 2.0 * sup_norm(v - exact));
  }
  SUBCASE("nonlinear families give a splitting error that decays") {
    const SplitProblem sp = split_problem({member(0.3), member(0.6, -0.2)}, {member(0.1, 0.1), member(0.5, -0.3)});
    const SpaceTimeGrid coarse = space(32);
    const SubSemigroup reference(combined_problem(sp), coarse, 1.0, 400);
    const GridFunction start = sine_on(coarse);
    const GridFunction ref = reference.apply(start);
    std::vector<double> errors;
    for (int steps : {5, 10, 20}) {
      const SplittingStepper s(sp, coarse, 1.0 / steps, 400 / steps);
      GridFunction u = start;
      for (int n = 0; n < steps; ++n) u = s.step(u);
      errors.push_back(sup_norm(u - ref));
    }
    CHECK(errors[0] > 1e-6);
    CHECK(errors[1] < errors[0]);
    CHECK(errors[2] < errors[1]);
  }
}

TEST_CASE("semigroup steps are monotone and nonexpansive") {
  const SpaceTimeGrid g = space(32);
  const SplitProblem sp = split_problem({member(0.3), member(0.6, -0.2)}, {member(0.1, 0.1), member(0.5, -0.3)});
  const SplittingStepper s(sp, g, 0.1, 4);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0), up(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    GridFunction phi(g), psi(g);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      phi[i] = u(rng);
      psi[i] = phi[i] + up(rng);
    }
    const GridFunction a = s.step(phi), b = s.step(psi);
    CHECK(positive_part_norm(a - b) <= 1e-9);
    CHECK(sup_norm(a - b) <= sup_norm(phi - psi) + 1e-9);
  }
}

TEST_CASE("piecewise-constant controls") {
  const SpaceTimeGrid g = space(32);
  const GridFunction phi = sine_on(g);
  const HjbProblem two = constant_problem(1, {coefficients(1, 1.0, 0.5), coefficients(1, 0.5, -0.5, 0.0, 1.0)},
                                          [](const Vector& x) { return std::sin(x[0]); });
  SUBCASE("single mode is the linear step") {
    const HjbProblem one = restrict_controls(two, {0});
    CHECK(sup_norm(pc_step(one, phi, 0.1, 5) - sub_semigroup_apply(one, phi, 0.1, 5)) == 0.0);
    const HjbProblem twice = constant_problem(1, {coefficients(1, 1.0, 0.5), coefficients(1, 1.0, 0.5)},
                                              [](const Vector&) { return 0.0; });
    CHECK(sup_norm(pc_step(twice, phi, 0.1, 5) - pc_step(one, phi, 0.1, 5)) == 0.0);
  }
  SUBCASE("minimum of the brute-force mode evolutions") {
    const PcStepper s(two, g, 0.1, 5);
    const GridFunction a = sub_semigroup_apply(restrict_controls(two, {0}), phi, 0.1, 5);
    const GridFunction b = sub_semigroup_apply(restrict_controls(two, {1}), phi, 0.1, 5);
    const GridFunction m = s.step(phi);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == std::min(a[i], b[i]));
  }
  SUBCASE("linear_mode maps the unhalved convention") {
    const LocalCoefficients k = linear_mode(Matrix::Constant(1, 1, 1.0), Vector::Zero(1), 0.0, 0.0);
    CHECK(k.diffusion()(0, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("rate experiment") {
  const SpaceTimeGrid g = space(32);
  const HjbProblem two = constant_problem(1, {coefficients(1, 1.0, 0.5), coefficients(1, 0.5, -0.5, 0.0, 0.3)},
                                          [](const Vector& x) { return std::sin(2.0 * x[0]); });
  const StepperFactory factory = [&](double dt, int inner) -> MacroStepper {
    auto s = std::make_shared<PcStepper>(two, g, dt, inner);
    return [s](const GridFunction& u) { return s->step(u); };
  };
  SemigroupExperimentOptions o;
  o.reference_ratio = 8;
  const SemigroupRateResult r = semigroup_rate_experiment(factory, two, g, {0.2, 0.1, 0.05}, o);
  CHECK(r.min_difference >= -1e-9);
  CHECK(r.report.levels.size() == 3);
  CHECK(compare_bounds(r.report, 0.1).pass);
  CHECK_THROWS_AS(semigroup_rate_experiment(factory, two, g, {0.3}, o), std::invalid_argument);
}

TEST_CASE("consistency residual decays with dt") {
  const SpaceTimeGrid g = space(64);
  const SplitProblem sp = split_problem({member(0.3), member(0.6, -0.2)}, {member(0.1, 0.1), member(0.5, -0.3)});
  const SmoothFunction phi = sine_mode(1, 1.0, 1.0, 0.0);
  const GridFunction generator = split_generator(sp, phi, g);
  const GridFunction start = sine_on(g);
  double previous = 1e9;
  for (double dt : {0.2, 0.1, 0.05}) {
    const auto s = std::make_shared<SplittingStepper>(sp, g, dt, 20);
    const double r = semigroup_consistency_residual([s](const GridFunction& u) { return s->step(u); }, start,
                                                    generator, dt);
    CHECK(r < previous);
    previous = r;
  }
}

}
