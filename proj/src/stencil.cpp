#include "hjb/stencil.hpp"

#include "hjb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hjb {

void SpatialStencil::add(const Offset& beta, double weight) {
  if (static_cast<int>(beta.size()) != dim_) throw std::invalid_argument("offset dimension mismatch");
  if (std::all_of(beta.begin(), beta.end(), [](int v) { return v == 0; }))
    throw std::invalid_argument("stencil offsets must be nonzero");
  if (weight == 0.0) return;
  auto [it, inserted] = entries_.emplace(beta, weight);
  if (!inserted) {
    it->second += weight;
    if (it->second == 0.0) entries_.erase(it);
  }
}

double SpatialStencil::weight(const Offset& beta) const {
  auto it = entries_.find(beta);
  return it == entries_.end() ? 0.0 : it->second;
}

double SpatialStencil::total_weight() const {
  double s = 0.0;
  for (const auto& [beta, w] : entries_) s += w;
  return s;
}

bool SpatialStencil::positive_type() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.second >= 0.0; });
}

Matrix BzDecomposition::reconstruct() const {
  const int n = directions.empty() ? static_cast<int>(residual.rows())
                                   : static_cast<int>(directions.front().size());
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < directions.size(); ++k) {
    Vector beta(n);
    for (int i = 0; i < n; ++i) beta[i] = directions[k][i];
    m += weights[k] * beta * beta.transpose();
  }
  return m;
}

namespace {

double positive(double v) { return std::max(v, 0.0); }
double negative(double v) { return std::max(-v, 0.0); }

Offset unit(int n, int i, int sign = 1) {
  Offset e(n, 0);
  e[i] = sign;
  return e;
}

Offset combine(int n, int i, int si, int j, int sj) {
  Offset e(n, 0);
  e[i] = si;
  e[j] = sj;
  return e;
}

Offset negated(Offset beta) {
  for (int& v : beta) v = -v;
  return beta;
}

double squared_norm(const Offset& beta) {
  double s = 0.0;
  for (int v : beta) s += static_cast<double>(v) * v;
  return s;
}

double matrix_scale(const Matrix& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

void require_square(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("matrix must be square");
}

void add_drift(SpatialStencil& st, const Vector& b, double dx) {
  const int n = st.dim();
  for (int i = 0; i < n; ++i) {
    st.add(unit(n, i, +1), positive(b[i]) / dx);
    st.add(unit(n, i, -1), negative(b[i]) / dx);
  }
}

// Primitive integer vectors in [-p, p]^n with first nonzero component positive,
// ordered by max-norm and then lexicographically.
std::vector<Offset> candidate_directions(int n, int p) {
  std::vector<Offset> out;
  Offset v(n, -p);
  while (true) {
    int first = 0;
    while (first < n && v[first] == 0) ++first;
    if (first < n && v[first] > 0) {
      int g = 0;
      for (int c : v) g = std::gcd(g, std::abs(c));
      if (g == 1) out.push_back(v);
    }
    int d = n - 1;
    while (d >= 0 && v[d] == p) v[d--] = -p;
    if (d < 0) break;
    ++v[d];
  }
  auto max_norm = [](const Offset& o) {
    int m = 0;
    for (int c : o) m = std::max(m, std::abs(c));
    return m;
  };
  std::stable_sort(out.begin(), out.end(), [&](const Offset& x, const Offset& y) {
    const int mx = max_norm(x);
    const int my = max_norm(y);
    if (mx != my) return mx < my;
    return std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end());
  });
  return out;
}

Matrix outer(const Offset& beta) {
  const int n = static_cast<int>(beta.size());
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = beta[i];
  return v * v.transpose();
}

BzDecomposition closed_form(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  BzDecomposition dec;
  auto push = [&](Offset beta, double w) {
    if (w > 0.0) {
      dec.directions.push_back(std::move(beta));
      dec.weights.push_back(w);
    }
  };
  for (int i = 0; i < n; ++i) {
    double w = a(i, i);
    for (int j = 0; j < n; ++j)
      if (j != i) w -= std::abs(a(i, j));
    push(unit(n, i), std::max(w, 0.0));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      push(combine(n, i, 1, j, 1), positive(a(i, j)));
      push(combine(n, i, 1, j, -1), negative(a(i, j)));
    }
  }
  dec.residual = Matrix::Zero(n, n);
  dec.residual = a - dec.reconstruct();
  return dec;
}

/// Lawson-Hanson active-set solve of min |A w - y| subject to w >= 0.
Vector nnls(const Matrix& A, const Vector& y) {
  const int m = static_cast<int>(A.cols());
  Vector w = Vector::Zero(m);
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff());
  auto solve_passive = [&](std::vector<int>& idx) {
    idx.clear();
    for (int k = 0; k < m; ++k)
      if (passive[static_cast<std::size_t>(k)]) idx.push_back(k);
    Matrix sub(A.rows(), static_cast<int>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(static_cast<int>(c)) = A.col(idx[c]);
    return Vector(sub.completeOrthogonalDecomposition().solve(y));
  };
  for (int outer = 0; outer < 3 * m; ++outer) {
    const Vector gradient = A.transpose() * (y - A * w);
    int enter = -1;
    double best = tol;
    for (int k = 0; k < m; ++k) {
      if (!passive[static_cast<std::size_t>(k)] && gradient[k] > best) {
        best = gradient[k];
        enter = k;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
    std::vector<int> idx;
    for (int inner = 0; inner < 3 * m; ++inner) {
      const Vector z = solve_passive(idx);
      if ((z.array() > 0.0).all()) {
        w.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) w[idx[c]] = z[static_cast<int>(c)];
        break;
      }
      double alpha = 1.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const double zc = z[static_cast<int>(c)];
        if (zc <= 0.0) alpha = std::min(alpha, w[idx[c]] / (w[idx[c]] - zc));
      }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        double& wk = w[idx[c]];
        wk += alpha * (z[static_cast<int>(c)] - wk);
        if (wk <= 1e-15) {
          wk = 0.0;
          passive[static_cast<std::size_t>(idx[c])] = false;
        }
      }
    }
  }
  return w;
}

BzDecomposition least_squares(const Matrix& a, int max_order) {
  const int n = static_cast<int>(a.rows());
  const std::vector<Offset> dirs = candidate_directions(n, max_order);
  const std::size_t m = dirs.size();
  std::vector<Matrix> atoms;
  atoms.reserve(m);
  for (const Offset& d : dirs) atoms.push_back(outer(d));

  // Symmetric entries as a vector, off-diagonals scaled by sqrt 2 so the
  // Euclidean norm matches the Frobenius norm.
  const int rows = n * (n + 1) / 2;
  Matrix design(rows, static_cast<int>(m));
  Vector target(rows);
  int row = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++row) {
      const double scale = i == j ? 1.0 : std::sqrt(2.0);
      target[row] = scale * a(i, j);
      for (std::size_t k = 0; k < m; ++k) design(row, static_cast<int>(k)) = scale * atoms[k](i, j);
    }
  }
  const Vector solution = nnls(design, target);
  std::vector<double> w(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) w[k] = solution[static_cast<int>(k)];

  BzDecomposition dec;
  for (std::size_t k = 0; k < m; ++k) {
    if (w[k] > 0.0) {
      dec.directions.push_back(dirs[k]);
      dec.weights.push_back(w[k]);
    }
  }
  dec.residual = Matrix::Zero(n, n);
  dec.residual = a - dec.reconstruct();
  return dec;
}

}  // namespace

SpatialStencil kushner_stencil(const Matrix& a, const Vector& b, double dx) {
  require_square(a);
  const int n = static_cast<int>(a.rows());
  if (b.size() != n) throw std::invalid_argument("drift dimension mismatch");
  if (!(dx > 0.0)) throw std::invalid_argument("dx must be positive");
  const double h2 = dx * dx;
  SpatialStencil st(n);
  for (int i = 0; i < n; ++i) {
    double diag = a(i, i) / (2.0 * h2);
    for (int j = 0; j < n; ++j)
      if (j != i) diag -= std::abs(a(i, j)) / (2.0 * h2);
    st.add(unit(n, i, +1), diag);
    st.add(unit(n, i, -1), diag);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double plus = positive(a(i, j)) / (2.0 * h2);
      const double minus = negative(a(i, j)) / (2.0 * h2);
      st.add(combine(n, i, 1, j, 1), plus);
      st.add(combine(n, i, -1, j, -1), plus);
      st.add(combine(n, i, 1, j, -1), minus);
      st.add(combine(n, i, -1, j, 1), minus);
    }
  }
  add_drift(st, b, dx);
  return st;
}

bool check_diag_dominant(const Matrix& a) {
  require_square(a);
  const double tol = 1e-14 * matrix_scale(a);
  for (int i = 0; i < a.rows(); ++i) {
    double off = 0.0;
    for (int j = 0; j < a.cols(); ++j)
      if (j != i) off += std::abs(a(i, j));
    if (a(i, i) - off < -tol) return false;
  }
  return true;
}

SpatialStencil bz_stencil(const BzDecomposition& dec, const Vector& b, double dx) {
  const int n = static_cast<int>(b.size());
  if (!(dx > 0.0)) throw std::invalid_argument("dx must be positive");
  if (dec.residual.size() != 0 && dec.residual.cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("decomposition residual is nonzero");
  SpatialStencil st(n);
  for (std::size_t k = 0; k < dec.directions.size(); ++k) {
    const Offset& beta = dec.directions[k];
    if (static_cast<int>(beta.size()) != n) throw std::invalid_argument("direction dimension mismatch");
    if (dec.weights[k] < 0.0) throw std::invalid_argument("decomposition weights must be nonnegative");
    const double w = dec.weights[k] / (squared_norm(beta) * dx * dx);
    st.add(beta, w);
    st.add(negated(beta), w);
  }
  add_drift(st, b, dx);
  return st;
}

BzDecomposition bz_decompose(const Matrix& a, int max_order) {
  require_square(a);
  const double scale = matrix_scale(a);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale)
    throw std::invalid_argument("matrix is not positive semidefinite");
  if (check_diag_dominant(a)) return closed_form(a);
  if (max_order < 1) throw std::invalid_argument("max_order must be at least 1");
  return least_squares(a, max_order);
}

SpatialStencil operator_stencil(StencilKind kind, const Matrix& a, const Vector& b, double dx,
                                int max_order) {
  if (kind == StencilKind::kushner) return kushner_stencil(2.0 * a, b, dx);
  BzDecomposition dec = bz_decompose(a, max_order);
  const double res = dec.residual.cwiseAbs().maxCoeff();
  if (res > 1e-12)
    throw NumericalError("diffusion matrix has no nonnegative decomposition over stencil order " +
                         std::to_string(max_order) + " (residual " + std::to_string(res) + ")");
  for (std::size_t k = 0; k < dec.directions.size(); ++k)
    dec.weights[k] *= squared_norm(dec.directions[k]);
  dec.residual.setZero();
  return bz_stencil(dec, b, dx);
}

double apply_stencil(const SpatialStencil& st, const GridFunction& phi, std::size_t node) {
  const SpaceTimeGrid& g = phi.grid();
  const double center = phi[node];
  double s = 0.0;
  for (const auto& [beta, w] : st.entries()) s += w * (phi[g.neighbor(node, beta)] - center);
  return s;
}

double consistency_residual(const SpatialStencil& st, double dx, const Matrix& a, const Vector& b,
                            const SmoothFunction& phi, const Vector& x) {
  const double exact = (a.cwiseProduct(phi.hessian(0.0, x))).sum() + b.dot(phi.gradient(0.0, x));
  const double center = phi.value(0.0, x);
  double discrete = 0.0;
  for (const auto& [beta, w] : st.entries()) {
    Vector y = x;
    for (int i = 0; i < y.size(); ++i) y[i] += beta[i] * dx;
    discrete += w * (phi.value(0.0, y) - center);
  }
  return std::abs(exact - discrete);
}

}  // namespace hjb
