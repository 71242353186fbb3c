#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace hjb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Finite set of controls, identified by index 0..count()-1.
class ControlSet {
 public:
  ControlSet() = default;
  explicit ControlSet(std::vector<std::string> labels);
  static ControlSet with_count(std::size_t count);

  std::size_t count() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

 private:
  std::vector<std::string> labels_;
};

/// Coefficients of one linear operator at a point. The diffusion matrix is
/// always derived from sigma.
struct LocalCoefficients {
  Matrix sigma;    // N x P
  Vector drift;    // N
  double reaction = 0.0;
  double source = 0.0;

  Matrix diffusion() const { return 0.5 * sigma * sigma.transpose(); }
};

using CoefficientFn =
    std::function<LocalCoefficients(std::size_t control, double t, const Vector& x)>;
using SpaceFn = std::function<double(const Vector& x)>;
using SpaceTimeFn = std::function<double(double t, const Vector& x)>;

/// Evaluator of (sigma, b, c, f) for every control. Set time_dependent to
/// false when the evaluator ignores t; schemes then build their operators once.
struct CoefficientField {
  CoefficientFn evaluate;
  bool time_dependent = true;
};

struct HjbProblem {
  int dim = 1;
  ControlSet controls;
  CoefficientField coefficients;
  SpaceFn initial;
  double horizon = 1.0;
  Vector period;  // per-dimension spatial period

  /// Throws std::invalid_argument on structural problems.
  void validate() const;

  /// Coefficients for one control with range and shape checks.
  LocalCoefficients at(std::size_t control, double t, const Vector& x) const;
};

/// Returns -tr[a X] - b.p - c r - f with a = sigma sigma^T / 2.
double evaluate_L(const HjbProblem& problem, std::size_t control, double t, const Vector& x,
                  double r, const Vector& p, const Matrix& X);

/// sup over controls of evaluate_L.
double evaluate_F(const HjbProblem& problem, double t, const Vector& x, double r, const Vector& p,
                  const Matrix& X);

/// Sampled estimate of the common bound and Lipschitz constant of the data.
struct A1Estimate {
  double bound = 0.0;          // max sup-norm + max Lipschitz estimate
  double max_sup_norm = 0.0;
  double max_lipschitz = 0.0;
  bool flagged = false;        // Lipschitz estimate grows under sample refinement
  std::string note;
};

/// Samples u0 and all coefficients on a periodic lattice with
/// `samples_per_dim` points per dimension (and as many time levels), and
/// estimates the bound K. Throws NumericalError naming the location of any
/// non-finite value.
A1Estimate verify_A1(const HjbProblem& problem, int samples_per_dim);

/// Smooth function of (t, x) with analytic derivatives.
struct SmoothFunction {
  SpaceTimeFn value;
  SpaceTimeFn time_derivative;
  std::function<Vector(double, const Vector&)> gradient;
  std::function<Matrix(double, const Vector&)> hessian;
};

/// amplitude * exp(-decay t) * sum_d sin(wavenumber x_d + phase).
SmoothFunction sine_mode(int dim, double amplitude, double wavenumber, double decay,
                         double phase = 0.0);

/// Constant function.
SmoothFunction constant_function(int dim, double value);

/// Coefficients without the source term; the manufactured problem supplies f.
using OperatorFn = std::function<LocalCoefficients(std::size_t control, double t, const Vector& x)>;
using SlackFn = std::function<double(std::size_t control, double t, const Vector& x)>;

struct ManufacturedProblem {
  HjbProblem problem;
  SmoothFunction exact;
  SlackFn slack;

  /// u*_t + F(t, x, u*, Du*, D^2u*), zero up to rounding.
  double residual(double t, const Vector& x) const;
};

/// Builds f^a := -tr[a D^2u*] - b.Du* - c u* + u*_t + g^a so that u* solves
/// the HJB equation exactly. The slack is checked on a lattice of
/// `check_samples` points per dimension (and time levels): g >= 0 and
/// min over controls of g == 0, else std::invalid_argument.
ManufacturedProblem manufacture(int dim, ControlSet controls, OperatorFn coefficients,
                                SlackFn slack, SmoothFunction exact, double horizon,
                                Vector period, int check_samples = 16);

/// Restriction of a problem to a subset of its controls (indices into the
/// original control set). Labels are carried over.
HjbProblem restrict_controls(const HjbProblem& problem, const std::vector<std::size_t>& subset);

/// A square root of 2a, i.e. sigma with sigma sigma^T / 2 = a, for a symmetric
/// positive semidefinite a.
Matrix sigma_from_diffusion(const Matrix& a);

}  // namespace hjb
