#include "lpvcert/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace lpvcert {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: not square");
  if (m.rows() < 1) throw std::invalid_argument("SymMatrix: empty");
  require_finite(m, "SymMatrix");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }
SymMatrix SymMatrix::zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }

double min_eigenvalue(const Matrix& m_symmetric) {
  require_finite(m_symmetric, "min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("min_eigenvalue: eigensolve failed");
  return es.eigenvalues()(0);
}

double min_eigenvalue(const SymMatrix& m) { return min_eigenvalue(m.mat()); }

bool is_positive_definite(const SymMatrix& m, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("is_positive_definite: tol must be > 0");
  return min_eigenvalue(m) > tol;
}

bool is_positive_definite(const SymMatrix& m) {
  double scale = m.mat().cwiseAbs().maxCoeff();
  return is_positive_definite(m, 1e-8 * (scale > 0 ? scale : 1.0));
}

Vector svec(const SymMatrix& m) {
  const Eigen::Index n = m.dim();
  Vector v(n * (n + 1) / 2);
  const double rt2 = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) v(k++) = (i == j) ? m(i, j) : rt2 * m(i, j);
  return v;
}

SymMatrix smat(const Vector& v) {
  // n(n+1)/2 = len  =>  n = (-1 + sqrt(1 + 8 len)) / 2
  const auto len = v.size();
  const auto n = static_cast<Eigen::Index>(std::llround((-1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(len))) / 2.0));
  if (n * (n + 1) / 2 != len) throw std::invalid_argument("smat: length is not n(n+1)/2");
  Matrix m(n, n);
  const double rt2 = std::sqrt(2.0);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) {
      const double x = (i == j) ? v(k) : v(k) / rt2;
      m(i, j) = x;
      m(j, i) = x;
      ++k;
    }
  return SymMatrix(m);
}

Matrix guarded_inverse(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": not square");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0) || smax / smin > 1e12)
    throw std::runtime_error(std::string(what) + ": matrix is numerically singular (cond ~ " +
                             std::to_string(smin > 0 ? smax / smin
                                                     : std::numeric_limits<double>::infinity()) +
                             ")");
  return svd.solve(Matrix::Identity(m.rows(), m.cols()));
}

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius: not square");
  require_finite(a, "spectral_radius");
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_radius: eigensolve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace lpvcert
