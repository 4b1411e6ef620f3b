#include "privdet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "privdet/errors.hpp"

namespace privdet {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

RankDecision numerical_rank(const Matrix& a) {
  RankDecision d;
  if (a.rows() == 0 || a.cols() == 0) {
    d.singular_values = Vector::Zero(0);
    return d;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  d.singular_values = svd.singularValues();
  const double smax = d.singular_values.size() ? d.singular_values(0) : 0.0;
  d.tolerance = static_cast<double>(std::max(a.rows(), a.cols())) * kEps * smax;
  d.rank = 0;
  for (Eigen::Index i = 0; i < d.singular_values.size(); ++i) {
    if (d.singular_values(i) > d.tolerance) ++d.rank;
  }
  return d;
}

Matrix pinv(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0 || a.isZero(0.0)) {
    return Matrix::Zero(a.cols(), a.rows());
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol =
      static_cast<double>(std::max(a.rows(), a.cols())) * kEps * sv(0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix null_space_basis(const Matrix& a, double min_tolerance) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0 || a.isZero(0.0)) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double tol = std::max(
      static_cast<double>(std::max(a.rows(), a.cols())) * kEps * sv(0),
      min_tolerance);
  if (tol >= sv(0)) return Matrix::Identity(n, n);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

Matrix orthonormal_image_basis(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0 || a.isZero(0.0)) {
    return Matrix::Zero(a.rows(), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double tol =
      static_cast<double>(std::max(a.rows(), a.cols())) * kEps * sv(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

Matrix cholesky_inverse_factor(const Matrix& s) {
  require(s.rows() == s.cols(), "cholesky_inverse_factor: matrix not square");
  require(s.rows() > 0, "cholesky_inverse_factor: empty matrix");
  Eigen::LLT<Matrix> llt(symmetrize(s));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("cholesky_inverse_factor: matrix not positive definite");
  }
  Matrix l = llt.matrixL();
  // R = L^{-1}  =>  R^T R = L^{-T} L^{-1} = (L L^T)^{-1} = S^{-1}.
  return l.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(s.rows(), s.cols()));
}

GeneralizedEigen generalized_eigenpairs(const Matrix& m1, const Matrix& m2) {
  require(m1.rows() == m1.cols() && m2.rows() == m2.cols() &&
              m1.rows() == m2.rows(),
          "generalized_eigenpairs: dimension mismatch");
  const double asym = (m1 - m1.transpose()).norm() + (m2 - m2.transpose()).norm();
  require(asym <= 1e-8 * (1.0 + m1.norm() + m2.norm()),
          "generalized_eigenpairs: pencil not symmetric");

  // Restrict to Im(m2); there the second operand is PD and the standard
  // symmetric-definite solver applies.
  const Matrix v = orthonormal_image_basis(symmetrize(m2));
  if (v.cols() == 0) {
    throw std::invalid_argument("generalized_eigenpairs: empty pencil (m2 == 0)");
  }
  const Matrix a = symmetrize(v.transpose() * m1 * v);
  const Matrix b = symmetrize(v.transpose() * m2 * v);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(a, b);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("generalized_eigenpairs: solver failed");
  }
  GeneralizedEigen out;
  out.values = solver.eigenvalues();
  out.vectors = v * solver.eigenvectors();
  return out;
}

Matrix matrix_exponential(const Matrix& a) {
  require(a.rows() == a.cols(), "matrix_exponential: matrix not square");
  return a.exp();
}

Matrix exp_integral(const Matrix& a, double ts) {
  require(a.rows() == a.cols(), "exp_integral: matrix not square");
  require(std::isfinite(ts) && ts >= 0.0, "exp_integral: ts must be >= 0");
  const Eigen::Index n = a.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n);
  const Matrix e = matrix_exponential(aug * ts);
  return e.topRightCorner(n, n);
}

double psd_default_tol(const Matrix& a, const Matrix& b) {
  return 1e-9 * (1.0 + std::max(a.norm(), b.norm()));
}

bool psd_geq(const Matrix& a, const Matrix& b, double tol) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "psd_geq: dimension mismatch");
  if (tol < 0.0) tol = psd_default_tol(a, b);
  if (a.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(a - b),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("psd_geq: eigensolver failed");
  }
  return es.eigenvalues().minCoeff() >= -tol;
}

bool is_psd(const Matrix& a, double tol) {
  return psd_geq(a, Matrix::Zero(a.rows(), a.cols()), tol);
}

Matrix kron_identity(int t, const Matrix& a) {
  require(t >= 0, "kron_identity: negative multiplicity");
  Matrix out = Matrix::Zero(t * a.rows(), t * a.cols());
  for (int i = 0; i < t; ++i) {
    out.block(i * a.rows(), i * a.cols(), a.rows(), a.cols()) = a;
  }
  return out;
}

}  // namespace privdet
