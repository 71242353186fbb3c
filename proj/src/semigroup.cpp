#include "hjb/semigroup.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hjb {

namespace {

void check_family(const ControlFamily& family, int dim) {
  if (family.empty()) throw std::invalid_argument("control family must not be empty");
  for (const DiffusionControl& c : family) {
    if (c.diffusion.rows() != dim || c.diffusion.cols() != dim)
      throw std::invalid_argument("diffusion matrix size does not match the dimension");
    sigma_from_diffusion(c.diffusion);  // throws unless PSD
  }
}

HjbProblem constant_problem(const SplitProblem& sp, std::vector<LocalCoefficients> members) {
  HjbProblem p;
  p.dim = sp.dim;
  p.controls = ControlSet::with_count(members.size());
  p.horizon = sp.horizon;
  p.period = Vector::Constant(sp.dim, sp.period);
  p.initial = sp.initial;
  p.coefficients.time_dependent = false;
  p.coefficients.evaluate = [members = std::move(members)](std::size_t a, double, const Vector&) {
    return members.at(a);
  };
  return p;
}

LocalCoefficients member(int dim, const Matrix& diffusion, double source) {
  LocalCoefficients k;
  k.sigma = sigma_from_diffusion(diffusion);
  k.drift = Vector::Zero(dim);
  k.source = source;
  return k;
}

SchemeOptions implicit(SchemeOptions options) {
  options.theta = 1.0;
  return options;
}

int whole_steps(double total, double step, const char* what) {
  const double ratio = total / step;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument(std::string(what) + " must divide evenly");
  return static_cast<int>(n);
}

}  // namespace

void SplitProblem::validate() const {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  if (!(period > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("period and horizon must be positive");
  if (!initial) throw std::invalid_argument("initial data missing");
  check_family(first, dim);
  check_family(second, dim);
}

HjbProblem family_problem(const SplitProblem& sp, const ControlFamily& family) {
  sp.validate();
  std::vector<LocalCoefficients> members;
  for (const DiffusionControl& c : family) members.push_back(member(sp.dim, c.diffusion, c.source));
  return constant_problem(sp, std::move(members));
}

HjbProblem combined_problem(const SplitProblem& sp) {
  sp.validate();
  std::vector<LocalCoefficients> members;
  for (const DiffusionControl& a : sp.first)
    for (const DiffusionControl& b : sp.second)
      members.push_back(member(sp.dim, a.diffusion + b.diffusion, a.source + b.source));
  return constant_problem(sp, std::move(members));
}

GridFunction split_generator(const SplitProblem& sp, const SmoothFunction& phi,
                             const SpaceTimeGrid& grid) {
  GridFunction out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Matrix X = phi.hessian(0.0, grid.node(i));
    for (const ControlFamily* family : {&sp.first, &sp.second}) {
      double best = -std::numeric_limits<double>::infinity();
      for (const DiffusionControl& c : *family)
        best = std::max(best, -(c.diffusion.cwiseProduct(X)).sum() - c.source);
      out[i] += best;
    }
  }
  return out;
}

SubSemigroup::SubSemigroup(const HjbProblem& problem, const SpaceTimeGrid& space, double dt,
                           int inner_steps, SchemeOptions options)
    : scheme_(problem, space.with_time(dt, inner_steps), implicit(options)) {
  if (problem.coefficients.time_dependent)
    throw std::invalid_argument("semigroup steps need time-independent coefficients");
}

GridFunction SubSemigroup::apply(const GridFunction& phi) const {
  GridFunction u = phi;
  for (int n = 1; n <= scheme_.grid().time_steps(); ++n) u = scheme_.step(u, n).first;
  return u;
}

GridFunction sub_semigroup_apply(const HjbProblem& problem, const GridFunction& phi, double dt,
                                 int inner_steps, SchemeOptions options) {
  if (inner_steps < 1) throw std::invalid_argument("inner steps must be at least 1");
  return SubSemigroup(problem, phi.grid(), dt, inner_steps, options).apply(phi);
}

SplittingStepper::SplittingStepper(const SplitProblem& sp, const SpaceTimeGrid& space, double dt,
                                   int inner_steps, SchemeOptions options)
    : first_(family_problem(sp, sp.first), space, dt, inner_steps, options),
      second_(family_problem(sp, sp.second), space, dt, inner_steps, options) {}

GridFunction splitting_step(const SplitProblem& sp, const GridFunction& phi, double dt,
                            int inner_steps, SchemeOptions options) {
  return SplittingStepper(sp, phi.grid(), dt, inner_steps, options).step(phi);
}

PcStepper::PcStepper(const HjbProblem& modes, const SpaceTimeGrid& space, double dt,
                     int inner_steps, SchemeOptions options) {
  modes.validate();
  for (std::size_t i = 0; i < modes.controls.count(); ++i)
    modes_.emplace_back(restrict_controls(modes, {i}), space, dt, inner_steps, options);
}

std::vector<GridFunction> PcStepper::mode_steps(const GridFunction& phi) const {
  std::vector<GridFunction> out;
  out.reserve(modes_.size());
  for (const SubSemigroup& s : modes_) out.push_back(s.apply(phi));
  return out;
}

GridFunction PcStepper::step(const GridFunction& phi) const {
  std::vector<GridFunction> candidates = mode_steps(phi);
  GridFunction out = std::move(candidates.front());
  for (std::size_t m = 1; m < candidates.size(); ++m)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], candidates[m][i]);
  return out;
}

GridFunction pc_step(const HjbProblem& modes, const GridFunction& phi, double dt, int inner_steps,
                     SchemeOptions options) {
  return PcStepper(modes, phi.grid(), dt, inner_steps, options).step(phi);
}

LocalCoefficients linear_mode(const Matrix& sigma, const Vector& b, double c, double f) {
  LocalCoefficients k;
  k.sigma = std::sqrt(2.0) * sigma;
  k.drift = b;
  k.reaction = c;
  k.source = f;
  return k;
}

SemigroupRateResult semigroup_rate_experiment(const StepperFactory& factory,
                                              const HjbProblem& reference,
                                              const SpaceTimeGrid& space,
                                              const std::vector<double>& dt_list,
                                              const SemigroupExperimentOptions& options) {
  if (dt_list.empty()) throw std::invalid_argument("Δt list must not be empty");
  if (options.reference_ratio < 1) throw std::invalid_argument("reference ratio must be positive");
  const double horizon = reference.horizon;
  std::vector<int> macro_steps;
  for (double dt : dt_list) macro_steps.push_back(whole_steps(horizon, dt, "Δt into the horizon"));
  const std::size_t finest = static_cast<std::size_t>(
      std::min_element(dt_list.begin(), dt_list.end()) - dt_list.begin());

  double ref_dt = dt_list[finest] / options.reference_ratio;
  SchemeOptions scheme_options;
  scheme_options.theta = 1.0;

  SemigroupRateResult result;
  for (int attempt = 0;; ++attempt) {
    result = SemigroupRateResult{};
    result.report.parameter_name = "dt";
    result.reference_dt = ref_dt;
    result.calibrations = attempt;
    result.min_difference = std::numeric_limits<double>::infinity();

    const int ref_steps = whole_steps(horizon, ref_dt, "reference step into the horizon");
    const ThetaScheme ref_scheme(reference, space.with_time(horizon, ref_steps), scheme_options);
    const Trajectory ref = ref_scheme.solve();
    for (const GridFunction& u : ref.levels)
      result.reference_scale = std::max(result.reference_scale, sup_norm(u));

    GridFunction finest_result(space);
    for (std::size_t l = 0; l < dt_list.size(); ++l) {
      const double dt = dt_list[l];
      const int inner = whole_steps(dt, ref_dt, "reference step into Δt");
      const MacroStepper step = factory(dt, inner);
      GridFunction u = ref.levels.front();
      for (int n = 1; n <= macro_steps[l]; ++n) {
        u = step(u);
        const GridFunction diff = u - ref.levels[static_cast<std::size_t>(n) * inner];
        for (double d : diff.values()) result.min_difference = std::min(result.min_difference, d);
      }
      const GridFunction err = ref.levels.back() - u;
      RateLevel level;
      level.parameter = dt;
      level.h = dt;
      level.dt = dt;
      level.dx = space.dx();
      level.err_plus = positive_part_norm(err);
      level.err_minus = negative_part_norm(err);
      level.err_total = sup_norm(err);
      result.report.levels.push_back(level);
      if (l == finest) finest_result = u;
    }
    finalize_report(result.report);

    if (options.inner_error_fraction <= 0.0) break;
    const double dt = dt_list[finest];
    const int inner = whole_steps(dt, ref_dt, "reference step into Δt");
    const MacroStepper doubled = factory(dt, 2 * inner);
    GridFunction u = ref.levels.front();
    for (int n = 1; n <= macro_steps[finest]; ++n) u = doubled(u);
    result.inner_error = sup_norm(u - finest_result);
    double measured = 0.0;
    for (const RateLevel& level : result.report.levels)
      if (level.dt == dt) measured = level.err_total;
    if (result.inner_error <= options.inner_error_fraction * measured ||
        attempt >= options.max_calibrations)
      break;
    ref_dt /= 2.0;
  }
  return result;
}

double semigroup_consistency_residual(const MacroStepper& step, const GridFunction& phi,
                                      const GridFunction& generator, double dt) {
  const GridFunction next = step(phi);
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    worst = std::max(worst, std::abs((next[i] - phi[i]) / dt + generator[i]));
  return worst;
}

}  // namespace hjb
