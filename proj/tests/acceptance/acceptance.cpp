/// Acceptance checks; prints one PASS/FAIL line per criterion and exits
/// nonzero if any fails.

#include "hjb/cli.hpp"
#include "hjb/config.hpp"
#include "hjb/harness.hpp"
#include "hjb/scheme.hpp"
#include "hjb/semigroup.hpp"
#include "hjb/stencil.hpp"
#include "hjb/switching.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hjb;
namespace fs = std::filesystem;

namespace {

std::string config(const char* name) { return std::string(HJB_CONFIG_DIR) + "/" + name; }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) { return format_number(v); }

std::string levels_text(const RateReport& r) {
  std::ostringstream os;
  for (const RateLevel& l : r.levels)
    os << (&l == &r.levels.front() ? "" : " ") << num(l.parameter) << ":+" << num(l.err_plus) << "/-"
       << num(l.err_minus);
  return os.str();
}

int time_steps_for(const HjbProblem& p, double dt_target) {
  return SpaceTimeGrid::steps_for(p.horizon, dt_target);
}

SchemeOptions theta(double t) {
  SchemeOptions o;
  o.theta = t;
  return o;
}

int explicit_steps(const HjbProblem& p, int nx) {
  const double limit = max_stable_time_step(p, SpaceTimeGrid::for_problem(p, nx, 1), theta(0.0));
  return SpaceTimeGrid::steps_for(p.horizon, 0.9 * limit);
}

Outcome ac1() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const LoadedProblem heat = load_problem_file(config("heat.json"));
  std::vector<RefinementLevel> levels;
  for (int nx : {32, 64, 128, 256}) {
    const double dx = heat.problem.period[0] / nx;
    levels.push_back({nx, time_steps_for(heat.problem, dx)});
  }
  const RateReport r = run_refinement(heat.problem, theta(1.0), levels, ReferenceSolution::exact(*heat.exact));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (std::size_t i = 1; i < r.levels.size(); ++i)
    o.require(r.levels[i].err_total < r.levels[i - 1].err_total, "errors not decreasing");
  o.require(!r.fit.degenerate && r.fit.slope >= 0.9, "slope " + num(r.fit.slope) + " < 0.9");
  o.require(seconds < 10.0, "runtime " + num(seconds) + " s");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("slope ") + num(r.fit.slope) + ", runtime " +
              num(std::round(seconds * 1000) / 1000) + " s, errors " + levels_text(r);
  return o;
}

Outcome ac2() {
  Outcome o;
  const LoadedProblem m = load_problem_file(config("two_control.json"));
  std::vector<RefinementLevel> levels;
  for (int nx : {16, 32, 64, 128}) levels.push_back({nx, time_steps_for(m.problem, m.problem.period[0] / nx)});
  RateReport r = run_refinement(m.problem, theta(1.0), levels, ReferenceSolution::exact(*m.exact));
  r.theoretical_exponent = 0.2;
  const Verdict v = compare_bounds(r, 0.2);
  o.require(v.pass, v.reason);
  bool both_sides = true;
  for (const RateLevel& l : r.levels) both_sides = both_sides && std::isfinite(l.err_plus) && std::isfinite(l.err_minus);
  o.require(both_sides, "signed errors missing");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("slope ") + num(r.fit.slope) + ", signed errors " +
              levels_text(r);
  return o;
}

Outcome ac3() {
  Outcome o;
  const HjbProblem heat = load_problem_file(config("heat.json")).problem;
  const int nx = 64;
  const double dx = heat.period[0] / nx;
  const ThetaScheme implicit(heat, SpaceTimeGrid::for_problem(heat, nx, time_steps_for(heat, dx)), theta(1.0));
  const ThetaScheme explicit_ok(heat, SpaceTimeGrid::for_problem(heat, nx, explicit_steps(heat, nx)), theta(0.0));
  o.require(implicit.cfl_check().ok && explicit_ok.cfl_check().ok, "CFL not satisfied");
  const ProbeResult a = monotonicity_probe(implicit, 1000, 0);
  const ProbeResult b = monotonicity_probe(explicit_ok, 1000, 1);
  o.require(a.passed, "theta=1 violation: " + a.witness);
  o.require(b.passed, "theta=0 violation: " + b.witness);

  HjbProblem broken = heat;
  broken.horizon = 4.0 * dx * dx;
  const ThetaScheme bad(broken, SpaceTimeGrid::for_problem(broken, nx, 1), theta(0.0));
  const ProbeResult c = monotonicity_probe(bad, 1000, 0);
  o.require(!c.passed, "no violation found with dt = 4 dx^2");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("violations 0/0 under CFL; dt=4dx^2 witness: ") +
              c.witness;
  return o;
}

Outcome ac4() {
  Outcome o;
  const LoadedProblem m = load_problem_file(config("two_control.json"));
  double worst = -1.0;
  for (double th : {0.0, 1.0}) {
    const int nx = 32;
    const int nt = th == 0.0 ? explicit_steps(m.problem, nx) : 32;
    const ThetaScheme s(m.problem, SpaceTimeGrid::for_problem(m.problem, nx, nt), theta(th));
    const double mu = s.comparison_constants().mu;
    const Forcing g1 = [](double t, const Vector& x) { return 0.3 * std::sin(x[0] + t); };
    const Forcing g2 = [&](double t, const Vector& x) { return g1(t, x) + 1.0; };
    const Trajectory u = s.solve(&g1);
    const Trajectory v = s.solve(&g2);
    for (int n = 0; n <= nt; ++n) {
      const double t = s.grid().time(n);
      const double gap = positive_part_norm(u.levels[n] - v.levels[n]) - 2.0 * t * std::exp(mu * t);
      worst = std::max(worst, gap);
      o.require(gap <= 1e-9, "u - v exceeds 2te^{mu t} at level " + std::to_string(n));
    }
    const ProbeResult lemma = comparison_bound_check(s, u.levels, v.levels, g1, g2);
    const ProbeResult reverse = comparison_bound_check(s, v.levels, u.levels, g2, g1);
    o.require(lemma.passed, "comparison bound: " + lemma.witness);
    o.require(reverse.passed, "reverse comparison bound: " + reverse.witness);
  }
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("max(u - v - 2te^{mu t}) = ") + num(worst);
  return o;
}

Outcome ac5() {
  Outcome o;
  int checked = 0;
  for (const char* name : {"heat.json", "two_control.json", "switching.json", "pcc.json", "zero.json"}) {
    const HjbProblem p = load_problem_file(config(name)).problem;
    for (double th : {0.0, 1.0}) {
      const int nx = 32;
      const int nt = th == 0.0 ? explicit_steps(p, nx) : 32;
      const Trajectory tr = ThetaScheme(p, SpaceTimeGrid::for_problem(p, nx, nt), theta(th)).solve();
      const ProbeResult r = apriori_bounds_check(tr.levels, p);
      o.require(r.passed, std::string(name) + ": " + r.witness);
      ++checked;
    }
  }
  o.detail += (o.detail.empty() ? "" : " | ") + std::to_string(checked) + " trajectories within e^{lambda t}(|u0| + t sup|f|) * 1.05";
  return o;
}

Outcome ac6() {
  Outcome o;
  const HjbProblem p = load_problem_file(config("switching.json")).problem;
  const auto modes = load_modes_file(config("modes.json"), p);
  const int nx = 128;
  const SpaceTimeGrid g = SpaceTimeGrid::for_problem(p, nx, explicit_steps(p, nx));
  KRateResult r = k_rate_experiment(p, modes, {0.4, 0.2, 0.1, 0.05}, g, theta(0.0));
  const double floor = -1e-6 * std::max(1.0, r.reference_scale);
  o.require(r.min_difference >= floor, "min(v_i - u_ref) = " + num(r.min_difference));
  const Verdict v = compare_bounds(r.report, 1.0 / 3.0);
  o.require(v.pass, v.reason);
  o.require(r.max_band_excess <= 1e-9, "band exceeds k by " + num(r.max_band_excess));
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("slope ") + num(r.report.fit.slope) +
              ", min(v_i - u_ref) " + num(r.min_difference) + ", band excess " + num(r.max_band_excess);
  return o;
}

Outcome ac7() {
  Outcome o;
  const SplitProblem sp = load_split_file(config("split.json"));
  const SpaceTimeGrid space(sp.dim, sp.period, 64, sp.horizon, 1);
  const StepperFactory factory = [&](double dt, int inner) -> MacroStepper {
    auto s = std::make_shared<SplittingStepper>(sp, space, dt, inner);
    return [s](const GridFunction& u) { return s->step(u); };
  };
  const SemigroupRateResult r =
      semigroup_rate_experiment(factory, combined_problem(sp), space, {0.1, 0.05, 0.025, 0.0125});
  const Verdict v = compare_bounds(r.report, 1.0 / 13.0);
  o.require(v.pass, v.reason);

  // Commuting linear flows: a = 0.3 and a = 0.2 on sin x.
  SplitProblem lin = sp;
  lin.initial = [](const Vector& x) { return std::sin(x[0]); };
  lin.first = {{Matrix::Constant(1, 1, 0.3), 0.0}};
  lin.second = {{Matrix::Constant(1, 1, 0.2), 0.0}};
  const double dt = 0.1;
  const int inner = 10;
  const SplittingStepper split(lin, space, dt, inner);
  const SubSemigroup direct(combined_problem(lin), space, dt, inner);
  GridFunction u = GridFunction::sample(space, lin.initial), w = u;
  for (int n = 0; n < 10; ++n) {
    u = split.step(u);
    w = direct.apply(w);
  }
  const GridFunction exact = GridFunction::sample(space, [](const Vector& x) { return std::exp(-0.5) * std::sin(x[0]); });
  const double split_error = sup_norm(u - exact), inner_error = sup_norm(w - exact);
  o.require(split_error <= 2.0 * inner_error, "commuting split error " + num(split_error) + " > 2 x " + num(inner_error));
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("slope ") + num(r.report.fit.slope) +
              ", commuting split/inner error " + num(split_error) + "/" + num(inner_error);
  return o;
}

Outcome ac8() {
  Outcome o;
  const HjbProblem p = load_problem_file(config("pcc.json")).problem;
  const SpaceTimeGrid space = SpaceTimeGrid::for_problem(p, 64, 1);
  const StepperFactory factory = [&](double dt, int inner) -> MacroStepper {
    auto s = std::make_shared<PcStepper>(p, space, dt, inner);
    return [s](const GridFunction& u) { return s->step(u); };
  };
  const SemigroupRateResult r = semigroup_rate_experiment(factory, p, space, {0.1, 0.05, 0.025, 0.0125});
  o.require(r.min_difference >= -1e-6 * std::max(1.0, r.reference_scale), "u_h - u_ref = " + num(r.min_difference));
  const Verdict v = compare_bounds(r.report, 0.1);
  o.require(v.pass, v.reason);
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("slope ") + num(r.report.fit.slope) +
              ", min(u_h - u_ref) " + num(r.min_difference);
  return o;
}

Outcome ac9() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> off(-1.0, 1.0), extra(0.0, 1.0);
  double worst_residual = 0.0;
  int negative = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + trial % 2;
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = off(rng);
    for (int i = 0; i < n; ++i) a(i, i) = a.row(i).cwiseAbs().sum() + extra(rng);
    const BzDecomposition dec = bz_decompose(a, 2);
    worst_residual = std::max(worst_residual, (a - dec.reconstruct()).cwiseAbs().maxCoeff());
    worst_residual = std::max(worst_residual, dec.residual.cwiseAbs().maxCoeff());
    for (double w : dec.weights) negative += w < 0.0;
  }
  o.require(worst_residual <= 1e-12, "residual " + num(worst_residual));
  o.require(negative == 0, std::to_string(negative) + " negative weights");

  int rank_one = 0, exact = 0;
  for (int n : {2, 3}) {
    std::vector<int> b(static_cast<std::size_t>(n), -3);
    while (true) {
      bool zero = true;
      for (int v : b) zero = zero && v == 0;
      if (!zero) {
        Vector beta(n);
        for (int d = 0; d < n; ++d) beta[d] = b[static_cast<std::size_t>(d)];
        const Matrix a = beta * beta.transpose();
        const BzDecomposition dec = bz_decompose(a, 3);
        bool ok = (a - dec.reconstruct()).cwiseAbs().maxCoeff() <= 1e-12 && dec.residual.cwiseAbs().maxCoeff() <= 1e-12;
        for (std::size_t k = 0; k < dec.directions.size(); ++k) {
          Vector d(n);
          for (int c = 0; c < n; ++c) d[c] = dec.directions[k][static_cast<std::size_t>(c)];
          const bool parallel = (d * d.transpose() * beta.squaredNorm() - a * d.squaredNorm()).cwiseAbs().maxCoeff() < 1e-9;
          ok = ok && dec.weights[k] >= 0.0 && (parallel || dec.weights[k] <= 1e-12);
        }
        ++rank_one;
        exact += ok;
      }
      int d = 0;
      while (d < n && ++b[static_cast<std::size_t>(d)] > 3) b[static_cast<std::size_t>(d++)] = -3;
      if (d == n) break;
    }
  }
  o.require(exact == rank_one, std::to_string(rank_one - exact) + " rank-one matrices not recovered");
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("10000 matrices, worst residual ") + num(worst_residual) +
              ", rank-one recovered " + std::to_string(exact) + "/" + std::to_string(rank_one);
  return o;
}

Outcome ac10() {
  Outcome o;
  std::ostringstream summary;
  struct Case {
    const char* name;
    int dim;
    StencilKind kind;
    Matrix a;
    Vector b;
    double expected;
  };
  const Matrix corr = (Matrix(2, 2) << 1.0, 0.4, 0.4, 0.8).finished();
  const std::vector<Case> cases = {
      {"1-D drift", 1, StencilKind::kushner, Matrix::Constant(1, 1, 0.5), Vector::Constant(1, 1.0), 1.0},
      {"1-D diffusion", 1, StencilKind::kushner, Matrix::Constant(1, 1, 0.5), Vector::Zero(1), 2.0},
      {"2-D drift kushner", 2, StencilKind::kushner, corr, (Vector(2) << 1.0, -0.5).finished(), 1.0},
      {"2-D diffusion kushner", 2, StencilKind::kushner, corr, Vector::Zero(2), 2.0},
      {"2-D diffusion bz", 2, StencilKind::bonnans_zidani, corr, Vector::Zero(2), 2.0},
      {"2-D drift bz", 2, StencilKind::bonnans_zidani, corr, (Vector(2) << -0.7, 0.3).finished(), 1.0},
  };
  for (const Case& c : cases) {
    SmoothFunction phi;
    phi.value = [](double, const Vector& x) {
      double s = 0.0;
      for (int d = 0; d < x.size(); ++d) s += std::sin((d + 1) * x[d] + 0.3);
      return s * std::cos(x[0]);
    };
    phi.time_derivative = [](double, const Vector&) { return 0.0; };
    phi.gradient = [](double, const Vector& x) {
      const int n = static_cast<int>(x.size());
      double s = 0.0;
      for (int d = 0; d < n; ++d) s += std::sin((d + 1) * x[d] + 0.3);
      Vector g(n);
      for (int d = 0; d < n; ++d) g[d] = (d + 1) * std::cos((d + 1) * x[d] + 0.3) * std::cos(x[0]);
      g[0] -= s * std::sin(x[0]);
      return g;
    };
    phi.hessian = [](double, const Vector& x) {
      const int n = static_cast<int>(x.size());
      double s = 0.0;
      for (int d = 0; d < n; ++d) s += std::sin((d + 1) * x[d] + 0.3);
      Matrix h = Matrix::Zero(n, n);
      for (int d = 0; d < n; ++d)
        h(d, d) = -(d + 1) * (d + 1) * std::sin((d + 1) * x[d] + 0.3) * std::cos(x[0]);
      for (int d = 0; d < n; ++d) {
        const double cross = -(d + 1) * std::cos((d + 1) * x[d] + 0.3) * std::sin(x[0]);
        h(0, d) += cross;
        h(d, 0) += cross;
      }
      h(0, 0) -= s * std::cos(x[0]);
      return h;
    };
    const Vector x = Vector::Constant(c.dim, 0.9);
    std::vector<double> dxs, residuals;
    for (double dx = 0.1; dxs.size() < 4; dx /= 2.0) {
      dxs.push_back(dx);
      residuals.push_back(consistency_residual(operator_stencil(c.kind, c.a, c.b, dx), dx, c.a, c.b, phi, x));
    }
    const double slope = fit_order(dxs, residuals).slope;
    o.require(std::abs(slope - c.expected) <= 0.15, std::string(c.name) + " slope " + num(slope));
    summary << (summary.tellp() > 0 ? ", " : "") << c.name << ' ' << num(std::round(slope * 1000) / 1000);
  }
  o.detail += (o.detail.empty() ? "" : " | ") + summary.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome ac11() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "hjb_acceptance_determinism";
  fs::remove_all(root);
  struct Job {
    const char* csv;
    std::vector<std::string> args;
  };
  const std::vector<Job> jobs = {
      {"solve.csv", {"solve", "--config", config("heat.json")}},
      {"rates.csv", {"rates", "--config", config("two_control.json"), "--levels", "16,32,64,128"}},
      {"heat_rates.csv", {"rates", "--config", config("heat.json"), "--levels", "32,64,128,256"}},
      {"sw.csv", {"switching", "--config", config("switching.json"), "--modes", config("modes.json"), "--nx", "128"}},
      {"split.csv", {"split", "--config", config("split.json")}},
      {"pcc.csv", {"pcc", "--config", config("pcc.json")}},
      {"probe.csv", {"probe", "--config", config("heat.json")}},
      {"decompose.csv", {"decompose", "--config", config("matrix.json")}},
  };
  int identical = 0;
  for (const Job& job : jobs) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / std::to_string(rep);
      fs::create_directories(dir);
      std::vector<std::string> args = job.args;
      args.push_back("--out");
      args.push_back((dir / job.csv).string());
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      o.require(code == 0, std::string(job.csv) + " exited " + std::to_string(code) + ": " + err.str());
      const std::string bytes = slurp(dir / job.csv);
      o.require(!bytes.empty(), std::string(job.csv) + " empty");
      if (rep == 0)
        first = bytes;
      else if (bytes == first)
        ++identical;
      else
        o.require(false, std::string(job.csv) + " differs between runs");
    }
  }
  o.detail += (o.detail.empty() ? "" : " | ") + std::to_string(identical) + "/" + std::to_string(jobs.size()) +
              " CSVs byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 heat benchmark", ac1},          {"AC2 FDM rate floor", ac2},
      {"AC3 monotonicity probe", ac3},      {"AC4 discrete comparison", ac4},
      {"AC5 a-priori bound", ac5},          {"AC6 switching rate", ac6},
      {"AC7 splitting rate", ac7},          {"AC8 piecewise-constant controls", ac8},
      {"AC9 BZ decomposition", ac9},        {"AC10 consistency orders", ac10},
      {"AC11 determinism", ac11}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
