#pragma once

#include "hjb/grid.hpp"
#include "hjb/harness.hpp"
#include "hjb/problem.hpp"
#include "hjb/scheme.hpp"

#include <functional>
#include <vector>

namespace hjb {

/// One member of a constant-coefficient family: X -> -tr[a X] - f.
struct DiffusionControl {
  Matrix diffusion;
  double source = 0.0;
};
using ControlFamily = std::vector<DiffusionControl>;

/// u_t + F_1(D²u) + F_2(D²u) = 0 with F_j(X) = sup_a {-tr[a_j^a X] - f_j^a}.
struct SplitProblem {
  int dim = 1;
  double period = 1.0;
  double horizon = 1.0;
  SpaceFn initial;
  ControlFamily first;
  ControlFamily second;

  /// Requires PSD diffusions of matching size and nonempty families.
  void validate() const;
};

/// HJB problem of one family alone (constant coefficients, time independent).
HjbProblem family_problem(const SplitProblem& sp, const ControlFamily& family);
/// HJB problem of F_1 + F_2, with the product of the two control sets.
HjbProblem combined_problem(const SplitProblem& sp);
/// sum of F_j(D²phi) at the nodes of `grid`, for the consistency residual.
GridFunction split_generator(const SplitProblem& sp, const SmoothFunction& phi,
                             const SpaceTimeGrid& grid);

/// Numerical semigroup of a time-independent HJB problem over a fixed Δt,
/// realized by `inner_steps` implicit (θ = 1) steps of size Δt / inner_steps.
class SubSemigroup {
 public:
  SubSemigroup(const HjbProblem& problem, const SpaceTimeGrid& space, double dt, int inner_steps,
               SchemeOptions options = {});

  GridFunction apply(const GridFunction& phi) const;
  double dt() const { return scheme_.grid().horizon(); }
  int inner_steps() const { return scheme_.grid().time_steps(); }
  const ThetaScheme& scheme() const { return scheme_; }

 private:
  ThetaScheme scheme_;
};

GridFunction sub_semigroup_apply(const HjbProblem& problem, const GridFunction& phi, double dt,
                                 int inner_steps, SchemeOptions options = {});

/// One macro step S_1(Δt) S_2(Δt).
class SplittingStepper {
 public:
  SplittingStepper(const SplitProblem& sp, const SpaceTimeGrid& space, double dt, int inner_steps,
                   SchemeOptions options = {});
  GridFunction step(const GridFunction& phi) const { return first_.apply(second_.apply(phi)); }

 private:
  SubSemigroup first_;
  SubSemigroup second_;
};

GridFunction splitting_step(const SplitProblem& sp, const GridFunction& phi, double dt,
                            int inner_steps, SchemeOptions options = {});

/// Piecewise-constant controls for u_t + max_i{-L^i u - f^i} = 0: the modes
/// are the controls of a time-independent HJB problem, and a macro step is
/// the pointwise minimum of the per-mode linear semigroups.
class PcStepper {
 public:
  PcStepper(const HjbProblem& modes, const SpaceTimeGrid& space, double dt, int inner_steps,
            SchemeOptions options = {});
  GridFunction step(const GridFunction& phi) const;
  /// Each mode's S_i(Δt) phi, before the minimum.
  std::vector<GridFunction> mode_steps(const GridFunction& phi) const;

 private:
  std::vector<SubSemigroup> modes_;
};

GridFunction pc_step(const HjbProblem& modes, const GridFunction& phi, double dt, int inner_steps,
                     SchemeOptions options = {});

/// Coefficients of a mode written as u_t - L u - f = 0 with
/// L = tr[sigma sigma^T D²] + b.D + c (no factor 1/2). The returned sigma is
/// scaled by sqrt(2) so that the operator convention a = sigma sigma^T / 2
/// yields the same diffusion.
LocalCoefficients linear_mode(const Matrix& sigma, const Vector& b, double c, double f);

/// Advances one macro step.
using MacroStepper = std::function<GridFunction(const GridFunction&)>;
/// Builds the macro stepper for Δt with the given number of inner steps.
using StepperFactory = std::function<MacroStepper(double dt, int inner_steps)>;

struct SemigroupExperimentOptions {
  /// Δt_ref = min(Δt list) / reference_ratio.
  int reference_ratio = 16;
  /// Richardson check: compare m and 2m inner steps at the finest Δt and
  /// refine the inner step (and the reference) while the inner error exceeds
  /// this fraction of the measured error. Zero disables calibration.
  double inner_error_fraction = 0.01;
  int max_calibrations = 3;
};

struct SemigroupRateResult {
  RateReport report;  // parameter = Δt; err_* are parts of u_ref - u_h at T
  /// min over Δt levels, macro times and nodes of u_h - u_ref.
  double min_difference = 0.0;
  double reference_scale = 0.0;
  double reference_dt = 0.0;
  /// Richardson estimate of the inner-scheme error at the finest Δt.
  double inner_error = 0.0;
  int calibrations = 0;
};

/// Runs the macro stepper for every Δt to the horizon and compares against
/// `reference` (the full HJB problem solved by the θ = 1 scheme with Δt_ref on
/// the same lattice). Inner steps per macro step are Δt / Δt_ref. Each Δt must
/// divide the horizon.
SemigroupRateResult semigroup_rate_experiment(const StepperFactory& factory,
                                              const HjbProblem& reference,
                                              const SpaceTimeGrid& space,
                                              const std::vector<double>& dt_list,
                                              const SemigroupExperimentOptions& options = {});

/// sup_x |(S(Δt) phi - phi)/Δt + F[phi]| for a macro stepper and the
/// generator values F[phi] on the nodes.
double semigroup_consistency_residual(const MacroStepper& step, const GridFunction& phi,
                                      const GridFunction& generator, double dt);

}  // namespace hjb
