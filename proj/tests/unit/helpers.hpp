#pragma once

#include "hjb/problem.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace hjb::test {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Constant-coefficient problem on the 2π torus; one entry per control.
inline HjbProblem constant_problem(int dim, std::vector<LocalCoefficients> controls, SpaceFn u0,
                                   double horizon = 1.0) {
  HjbProblem p;
  p.dim = dim;
  p.controls = ControlSet::with_count(controls.size());
  p.horizon = horizon;
  p.period = Vector::Constant(dim, two_pi);
  p.initial = std::move(u0);
  p.coefficients.time_dependent = false;
  p.coefficients.evaluate = [controls](std::size_t a, double, const Vector&) {
    return controls.at(a);
  };
  return p;
}

inline LocalCoefficients coefficients(int dim, double sigma, double drift = 0.0,
                                      double reaction = 0.0, double source = 0.0) {
  LocalCoefficients k;
  k.sigma = sigma * Matrix::Identity(dim, dim);
  k.drift = Vector::Constant(dim, drift);
  k.reaction = reaction;
  k.source = source;
  return k;
}

/// u_t = u_xx / 2 with u0 = sin x; exact solution e^{-t/2} sin x.
inline HjbProblem heat_problem(double horizon = 1.0) {
  return constant_problem(1, {coefficients(1, 1.0)}, [](const Vector& x) { return std::sin(x[0]); },
                          horizon);
}

inline double heat_exact(double t, const Vector& x) { return std::exp(-0.5 * t) * std::sin(x[0]); }

/// Two controls with different diffusion, drift and reaction; slacks
/// max(0, sin x) and max(0, -sin x); exact solution e^{-t/2} sin x.
inline ManufacturedProblem two_control_problem(double horizon = 1.0) {
  OperatorFn op = [](std::size_t a, double, const Vector&) {
    return a == 0 ? coefficients(1, 1.0, 1.0, 0.0) : coefficients(1, 0.5, -0.5, 0.5);
  };
  SlackFn slack = [](std::size_t a, double, const Vector& x) {
    const double s = std::sin(x[0]);
    return a == 0 ? std::max(0.0, s) : std::max(0.0, -s);
  };
  return manufacture(1, ControlSet::with_count(2), op, slack, sine_mode(1, 1.0, 1.0, 0.5), horizon,
                     Vector::Constant(1, two_pi));
}

}  // namespace hjb::test
