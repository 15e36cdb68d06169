#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace lpvcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Symmetry is enforced at construction by
/// averaging (M + M^T)/2, so downstream definiteness checks can assume
/// entries(i,j) == entries(j,i) exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix zero(Eigen::Index n);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Smallest eigenvalue via a symmetric eigensolve.
double min_eigenvalue(const SymMatrix& m);
double min_eigenvalue(const Matrix& m_symmetric);

/// True iff the smallest eigenvalue exceeds tol (tol > 0 required).
bool is_positive_definite(const SymMatrix& m, double tol);
/// Default tolerance: 1e-8 relative to the max-abs entry.
bool is_positive_definite(const SymMatrix& m);

/// Scaled half-vectorization: diagonal entries as-is, off-diagonal entries
/// scaled by sqrt(2) so that svec(A) . svec(B) = trace(A B). Lower triangle,
/// column by column.
Vector svec(const SymMatrix& m);
SymMatrix smat(const Vector& v);

/// Largest eigenvalue modulus of a square (not necessarily symmetric) matrix.
double spectral_radius(const Matrix& a);

/// Inverse by SVD with a condition-number guard (rejects beyond 1e12).
Matrix guarded_inverse(const Matrix& m, const char* what);

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace lpvcert
