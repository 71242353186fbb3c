#pragma once

#include "hjb/grid.hpp"
#include "hjb/problem.hpp"

#include <map>
#include <vector>

namespace hjb {

/// Difference operator phi -> sum_beta C(beta) (phi(x + beta Δx) - phi(x)).
/// Only nonzero weights are stored; the center weight is -total_weight().
class SpatialStencil {
 public:
  explicit SpatialStencil(int dim) : dim_(dim) {}

  /// Adds to the weight at beta; coinciding offsets are summed.
  void add(const Offset& beta, double weight);
  double weight(const Offset& beta) const;

  int dim() const { return dim_; }
  const std::map<Offset, double>& entries() const { return entries_; }
  double total_weight() const;
  double center_weight() const { return -total_weight(); }
  bool positive_type() const;

 private:
  int dim_;
  std::map<Offset, double> entries_;
};

/// a = sum_beta weight_beta beta beta^T + residual.
struct BzDecomposition {
  std::vector<Offset> directions;
  std::vector<double> weights;
  Matrix residual;

  Matrix reconstruct() const;
};

enum class StencilKind { kushner, bonnans_zidani };

/// Kushner's coefficient table:
///   C(±e_i)        = a_ii/(2Δx²) - Σ_{j≠i} |a_ij|/(2Δx²) + b_i^±/Δx
///   C(±(e_i+e_j))  = a_ij^+/(2Δx²),  C(±(e_i-e_j)) = a_ij^-/(2Δx²)
/// The resulting operator approximates tr[a D²]/2 + b.D. Weights may be
/// negative; positivity is reported by SpatialStencil::positive_type.
SpatialStencil kushner_stencil(const Matrix& a, const Vector& b, double dx);

/// a_ii - sum_{j != i} |a_ij| >= 0 for every row.
bool check_diag_dominant(const Matrix& a);

/// Directional second differences: C(±beta) = w_beta/(|beta|² Δx²), plus the
/// upwind drift terms b_i^±/Δx on ±e_i. Approximates
/// sum_beta w_beta D²_beta/|beta|² + b.D. Rejects decompositions whose
/// residual exceeds 1e-12.
SpatialStencil bz_stencil(const BzDecomposition& dec, const Vector& b, double dx);

/// Writes a symmetric PSD matrix as a nonnegative combination of beta beta^T.
/// Diagonally dominant input uses the closed form over {e_i, e_i ± e_j} and
/// has zero residual. Other input is fitted by nonnegative least squares over
/// primitive integer directions with components in [-max_order, max_order];
/// the residual reports what could not be represented. Throws
/// std::invalid_argument for asymmetric or indefinite input.
BzDecomposition bz_decompose(const Matrix& a, int max_order);

/// Positive-type discretization of tr[a D²] + b.D for the diffusion a used
/// by the HJB operator. Kushner applies the table to 2a; Bonnans-Zidani uses
/// the decomposition of a with weights rescaled by |beta|². Throws
/// NumericalError if a has no decomposition over the requested order.
SpatialStencil operator_stencil(StencilKind kind, const Matrix& a, const Vector& b, double dx,
                                int max_order = 2);

/// sum_beta C(beta) (phi(i + beta) - phi(i)) with periodic wrapping.
double apply_stencil(const SpatialStencil& st, const GridFunction& phi, std::size_t node);

/// |tr[a D²phi(x)] + b.Dphi(x) - L_h phi(x)| with L_h given by `st` on step
/// dx, evaluated on the continuous function phi at time 0.
double consistency_residual(const SpatialStencil& st, double dx, const Matrix& a, const Vector& b,
                            const SmoothFunction& phi, const Vector& x);

}  // namespace hjb
