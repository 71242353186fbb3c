#include "helpers.hpp"

#include "hjb/harness.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace hjb;
using namespace hjb::test;

namespace {

RateReport synthetic(const std::vector<double>& h, const std::vector<double>& e) {
  RateReport r;
  for (std::size_t i = 0; i < h.size(); ++i) {
    RateLevel l;
    l.parameter = l.h = h[i];
    l.err_total = l.err_plus = e[i];
    r.levels.push_back(l);
  }
  finalize_report(r);
  return r;
}

RateReport with_slope(double slope) {
  return synthetic({1.0, 0.5, 0.25}, {1.0, std::pow(0.5, slope), std::pow(0.25, slope)});
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("fit_order") {
  const FitResult half = fit_order({1.0, 0.25, 0.0625}, {1.0, 0.5, 0.25});
  CHECK(half.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(half.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit_order({1.0, 0.5, 0.25}, {3.0, 3.0 * std::pow(0.5, 0.2), 3.0 * std::pow(0.25, 0.2)}).slope ==
        doctest::Approx(0.2));
  CHECK(fit_order({0.1, 0.05, 0.025, 0.0125}, {0.1, 0.05, 0.025, 0.0125}).slope == doctest::Approx(1.0).epsilon(1e-6));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  std::vector<double> h, e;
  for (double x = 1.0; x > 1e-3; x /= 2.0) {
    h.push_back(x);
    e.push_back(x * (1.0 + noise(rng)));
  }
  const FitResult noisy = fit_order(h, e);
  CHECK(noisy.slope >= 0.9);
  CHECK(noisy.slope <= 1.1);

  const FitResult zero = fit_order({1.0, 0.5}, {0.0, 0.0});
  CHECK(zero.degenerate);
  CHECK(zero.note == "degenerate: zero error");
  CHECK(fit_order({1.0, 0.5, 0.25}, {0.0, 0.1, 0.05}).points == 2);
}

TEST_CASE("finalize_report sorts by descending parameter") {
  const RateReport r = synthetic({0.25, 1.0, 0.5}, {0.025, 0.1, 0.05});
  CHECK(r.levels.front().parameter == 1.0);
  CHECK(r.levels.back().parameter == 0.25);
  CHECK(r.fit.slope == doctest::Approx(1.0));
}

TEST_CASE("compare_bounds") {
  CHECK(compare_bounds(with_slope(0.5), 0.2).pass);
  CHECK(compare_bounds(with_slope(0.18), 0.2).pass);
  CHECK_FALSE(compare_bounds(with_slope(0.1), 0.2).pass);
  const RateReport bumpy = synthetic({1.0, 0.5, 0.25}, {0.1, 0.2, 0.01});
  CHECK_FALSE(compare_bounds(bumpy, 0.2).pass);
  const RateReport zeros = synthetic({1.0, 0.5, 0.25}, {0.0, 0.0, 0.0});
  CHECK(compare_bounds(zeros, 0.2).pass);
}

TEST_CASE("run_refinement") {
  SUBCASE("heat with dt = dx^2") {
    const HjbProblem p = heat_problem();
    std::vector<RefinementLevel> levels;
    for (int nx : {16, 32, 64, 128}) {
      const double dx = two_pi / nx;
      levels.push_back({nx, SpaceTimeGrid::steps_for(1.0, dx * dx)});
    }
    const RateReport r = run_refinement(p, {}, levels, ReferenceSolution::exact(heat_exact));
    for (std::size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].err_total < r.levels[i - 1].err_total);
    CHECK(compare_bounds(r, 0.2).pass);
  }
  SUBCASE("constant solution is degenerate") {
    const HjbProblem p = constant_problem(1, {coefficients(1, 1.0, 0.3)}, [](const Vector&) { return 2.0; });
    const RateReport r = run_refinement(p, {}, {{8, 4}, {16, 8}, {32, 16}},
                                        ReferenceSolution::exact([](double, const Vector&) { return 2.0; }));
    for (const RateLevel& l : r.levels) CHECK(l.err_total <= 1e-12);
    CHECK(r.fit.degenerate);
    CHECK(compare_bounds(r, 0.2).pass);
  }
  SUBCASE("CFL violations are recorded unless forced") {
    SchemeOptions o;
    o.theta = 0.0;
    const HjbProblem p = heat_problem(0.5);
    const RateReport r = run_refinement(p, o, {{16, 2}, {32, 4}}, ReferenceSolution::exact(heat_exact));
    for (const RateLevel& l : r.levels) CHECK(l.failed);
    RefinementOptions force;
    force.force = true;
    const RateReport forced = run_refinement(p, o, {{16, 2}}, ReferenceSolution::exact(heat_exact), force);
    CHECK_FALSE(forced.levels[0].failed);
  }
  SUBCASE("fine-grid reference") {
    const HjbProblem p = heat_problem();
    const Trajectory fine = ThetaScheme(p, SpaceTimeGrid::for_problem(p, 256, 64), {}).solve();
    const RateReport r = run_refinement(p, {}, {{16, 16}, {32, 16}, {64, 16}},
                                        ReferenceSolution::fine_grid(fine.levels));
    CHECK(r.levels.back().err_total < r.levels.front().err_total);
  }
  SUBCASE("identical runs give identical CSV") {
    const HjbProblem p = heat_problem();
    auto csv = [&] {
      const RateReport r = run_refinement(p, {}, {{16, 8}, {32, 16}}, ReferenceSolution::exact(heat_exact));
      std::ostringstream os;
      write_rate_csv(os, r, compare_bounds(r, 0.2));
      return os.str();
    };
    CHECK(csv() == csv());
  }
}

TEST_CASE("csv and plot script") {
  const RateReport r = with_slope(1.0);
  std::ostringstream csv, gp;
  write_rate_csv(csv, r, compare_bounds(r, 0.2));
  CHECK(csv.str().rfind("level,dx,dt,h,err_plus,err_minus,err_total,slope,verdict\n", 0) == 0);
  CHECK(csv.str().find("fit,,,,,,,1,pass\n") != std::string::npos);
  write_plot_script(gp, "r.csv", r);
  CHECK(gp.str().find("set logscale xy") != std::string::npos);
  CHECK(gp.str().find("'r.csv'") != std::string::npos);
}

}
