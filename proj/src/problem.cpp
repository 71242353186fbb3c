#include "hjb/problem.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hjb {

ControlSet::ControlSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("control set must not be empty");
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw std::invalid_argument("control labels must be distinct");
}

ControlSet ControlSet::with_count(std::size_t count) {
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) labels.push_back("control" + std::to_string(i));
  return ControlSet(std::move(labels));
}

void HjbProblem::validate() const {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  if (controls.count() < 1) throw std::invalid_argument("at least one control is required");
  if (!coefficients.evaluate) throw std::invalid_argument("coefficient evaluator missing");
  if (!initial) throw std::invalid_argument("initial data missing");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (period.size() != dim) throw std::invalid_argument("period must have one entry per dimension");
  for (int d = 0; d < dim; ++d)
    if (!(period[d] > 0.0)) throw std::invalid_argument("period must be positive");
}

LocalCoefficients HjbProblem::at(std::size_t control, double t, const Vector& x) const {
  if (control >= controls.count()) {
    throw std::out_of_range("control index " + std::to_string(control) + " out of range (" +
                            std::to_string(controls.count()) + " controls)");
  }
  LocalCoefficients k = coefficients.evaluate(control, t, x);
  if (k.sigma.rows() != dim) throw std::invalid_argument("sigma must have N rows");
  if (k.drift.size() != dim) throw std::invalid_argument("drift must have N entries");
  return k;
}

double evaluate_L(const HjbProblem& problem, std::size_t control, double t, const Vector& x,
                  double r, const Vector& p, const Matrix& X) {
  const LocalCoefficients k = problem.at(control, t, x);
  const Matrix a = k.diffusion();
  return -(a.cwiseProduct(X)).sum() - k.drift.dot(p) - k.reaction * r - k.source;
}

double evaluate_F(const HjbProblem& problem, double t, const Vector& x, double r, const Vector& p,
                  const Matrix& X) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < problem.controls.count(); ++a)
    best = std::max(best, evaluate_L(problem, a, t, x, r, p, X));
  return best;
}

namespace {

// Iterates a periodic lattice with n points per dimension.
template <class Visit>
void for_each_lattice_point(int dim, const Vector& period, int n, Visit&& visit) {
  std::vector<int> idx(dim, 0);
  Vector x(dim);
  while (true) {
    for (int d = 0; d < dim; ++d) x[d] = idx[d] * period[d] / n;
    visit(idx, x);
    int d = 0;
    while (d < dim && ++idx[d] == n) idx[d++] = 0;
    if (d == dim) break;
  }
}

std::string describe(const std::string& what, std::size_t control, double t, const Vector& x) {
  std::ostringstream os;
  os << what << " (control " << control << ", t=" << t << ", x=(";
  for (int d = 0; d < x.size(); ++d) os << (d ? "," : "") << x[d];
  os << "))";
  return os.str();
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

struct Sampled {
  double sup = 0.0;
  double lipschitz = 0.0;
};

// Sup norms and spatial divided differences of u0 and every coefficient.
Sampled sample_bounds(const HjbProblem& problem, int n) {
  Sampled out;
  const int dim = problem.dim;
  auto shift = [&](const Vector& x, int d) {
    Vector y = x;
    y[d] = std::fmod(x[d] + problem.period[d] / n, problem.period[d]);
    return y;
  };
  auto check = [](double v, const std::string& where) {
    if (!std::isfinite(v)) throw NumericalError("non-finite value in " + where);
  };

  for_each_lattice_point(dim, problem.period, n, [&](const std::vector<int>&, const Vector& x) {
    const double u = problem.initial(x);
    check(u, describe("initial data", 0, 0.0, x));
    out.sup = std::max(out.sup, std::abs(u));
    for (int d = 0; d < dim; ++d) {
      const double h = problem.period[d] / n;
      out.lipschitz = std::max(out.lipschitz, std::abs(problem.initial(shift(x, d)) - u) / h);
    }
  });

  const int time_levels = problem.coefficients.time_dependent ? n : 1;
  for (std::size_t a = 0; a < problem.controls.count(); ++a) {
    for (int k = 0; k < time_levels; ++k) {
      const double t = time_levels > 1 ? problem.horizon * k / (time_levels - 1) : 0.0;
      for_each_lattice_point(dim, problem.period, n, [&](const std::vector<int>&, const Vector& x) {
        const LocalCoefficients c = problem.at(a, t, x);
        for (double v : {max_abs(c.sigma), max_abs(c.drift), c.reaction, c.source})
          check(v, describe("coefficients", a, t, x));
        out.sup = std::max({out.sup, max_abs(c.sigma), max_abs(c.drift), std::abs(c.reaction),
                            std::abs(c.source)});
        for (int d = 0; d < dim; ++d) {
          const double h = problem.period[d] / n;
          const LocalCoefficients e = problem.at(a, t, shift(x, d));
          out.lipschitz = std::max({out.lipschitz, max_abs(e.sigma - c.sigma) / h,
                                    max_abs(e.drift - c.drift) / h,
                                    std::abs(e.reaction - c.reaction) / h,
                                    std::abs(e.source - c.source) / h});
        }
      });
    }
  }
  return out;
}

}  // namespace

A1Estimate verify_A1(const HjbProblem& problem, int samples_per_dim) {
  problem.validate();
  if (samples_per_dim < 2) throw std::invalid_argument("need at least 2 samples per dimension");
  const Sampled coarse = sample_bounds(problem, samples_per_dim);
  const Sampled fine = sample_bounds(problem, 2 * samples_per_dim);

  A1Estimate est;
  est.max_sup_norm = coarse.sup;
  est.max_lipschitz = coarse.lipschitz;
  est.bound = coarse.sup + coarse.lipschitz;
  if (fine.lipschitz > 1.5 * coarse.lipschitz && fine.lipschitz > 1e-12) {
    est.flagged = true;
    std::ostringstream os;
    os << "Lipschitz estimate grows under refinement (" << coarse.lipschitz << " -> "
       << fine.lipschitz << "); data is not Lipschitz on the torus";
    est.note = os.str();
  }
  return est;
}

SmoothFunction sine_mode(int dim, double amplitude, double wavenumber, double decay,
                         double phase) {
  SmoothFunction s;
  s.value = [=](double t, const Vector& x) {
    double sum = 0.0;
    for (int d = 0; d < dim; ++d) sum += std::sin(wavenumber * x[d] + phase);
    return amplitude * std::exp(-decay * t) * sum;
  };
  s.time_derivative = [=](double t, const Vector& x) {
    double sum = 0.0;
    for (int d = 0; d < dim; ++d) sum += std::sin(wavenumber * x[d] + phase);
    return -decay * amplitude * std::exp(-decay * t) * sum;
  };
  s.gradient = [=](double t, const Vector& x) {
    Vector g(dim);
    for (int d = 0; d < dim; ++d)
      g[d] = amplitude * std::exp(-decay * t) * wavenumber * std::cos(wavenumber * x[d] + phase);
    return g;
  };
  s.hessian = [=](double t, const Vector& x) {
    Matrix h = Matrix::Zero(dim, dim);
    for (int d = 0; d < dim; ++d)
      h(d, d) = -amplitude * std::exp(-decay * t) * wavenumber * wavenumber *
                std::sin(wavenumber * x[d] + phase);
    return h;
  };
  return s;
}

SmoothFunction constant_function(int dim, double value) {
  SmoothFunction s;
  s.value = [value](double, const Vector&) { return value; };
  s.time_derivative = [](double, const Vector&) { return 0.0; };
  s.gradient = [dim](double, const Vector&) { return Vector::Zero(dim).eval(); };
  s.hessian = [dim](double, const Vector&) { return Matrix::Zero(dim, dim).eval(); };
  return s;
}

double ManufacturedProblem::residual(double t, const Vector& x) const {
  return exact.time_derivative(t, x) + evaluate_F(problem, t, x, exact.value(t, x),
                                                  exact.gradient(t, x), exact.hessian(t, x));
}

ManufacturedProblem manufacture(int dim, ControlSet controls, OperatorFn coefficients,
                                SlackFn slack, SmoothFunction exact, double horizon,
                                Vector period, int check_samples) {
  if (period.size() != dim) throw std::invalid_argument("period must have one entry per dimension");
  const std::size_t m = controls.count();

  const int n = std::max(check_samples, 2);
  for (int k = 0; k < n; ++k) {
    const double t = horizon * k / (n - 1);
    for_each_lattice_point(dim, period, n, [&](const std::vector<int>&, const Vector& x) {
      double smallest = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < m; ++a) {
        const double g = slack(a, t, x);
        if (!(g >= 0.0)) throw std::invalid_argument(describe("negative slack", a, t, x));
        smallest = std::min(smallest, g);
      }
      if (smallest > 1e-12)
        throw std::invalid_argument(describe("slack has positive minimum over controls", 0, t, x));
    });
  }

  ManufacturedProblem out;
  out.exact = exact;
  out.slack = slack;
  HjbProblem& p = out.problem;
  p.dim = dim;
  p.controls = std::move(controls);
  p.horizon = horizon;
  p.period = std::move(period);
  p.initial = [exact](const Vector& x) { return exact.value(0.0, x); };
  p.coefficients.time_dependent = true;
  p.coefficients.evaluate = [coefficients, slack, exact](std::size_t a, double t,
                                                         const Vector& x) {
    LocalCoefficients k = coefficients(a, t, x);
    const Matrix diffusion = k.diffusion();
    const double u = exact.value(t, x);
    k.source = -(diffusion.cwiseProduct(exact.hessian(t, x))).sum() -
               k.drift.dot(exact.gradient(t, x)) - k.reaction * u + exact.time_derivative(t, x) +
               slack(a, t, x);
    return k;
  };
  p.validate();
  return out;
}

HjbProblem restrict_controls(const HjbProblem& problem, const std::vector<std::size_t>& subset) {
  if (subset.empty()) throw std::invalid_argument("control subset must not be empty");
  std::vector<std::string> labels;
  for (std::size_t i : subset) {
    if (i >= problem.controls.count())
      throw std::out_of_range("control index " + std::to_string(i) + " out of range");
    labels.push_back(problem.controls.label(i));
  }
  HjbProblem out = problem;
  out.controls = ControlSet(std::move(labels));
  out.coefficients.evaluate = [inner = problem.coefficients.evaluate, subset](
                                  std::size_t a, double t, const Vector& x) {
    return inner(subset.at(a), t, x);
  };
  return out;
}

Matrix sigma_from_diffusion(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
  Vector lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (int i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -1e-12 * scale) throw std::invalid_argument("diffusion matrix is not PSD");
    lambda[i] = std::sqrt(2.0 * std::max(lambda[i], 0.0));
  }
  return eig.eigenvectors() * lambda.asDiagonal();
}

}  // namespace hjb
