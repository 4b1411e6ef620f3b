#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace privdet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numerical rank together with the data that produced the decision, so
// callers can report *why* a rank was assigned.
struct RankDecision {
  Eigen::Index rank = 0;
  double tolerance = 0.0;       // absolute singular-value threshold used
  Vector singular_values;       // descending
};

// Rank from SVD with threshold max(rows, cols) * eps * sigma_max.
RankDecision numerical_rank(const Matrix& a);

// Moore-Penrose pseudoinverse via SVD with the numerical_rank tolerance.
// Zero (or zero-sized) input yields the transposed-shape zero matrix.
Matrix pinv(const Matrix& a);

// Orthonormal basis of the null space of `a` as columns; returns an
// n x (n - rank) matrix (identity when a == 0, zero-width when full rank).
// min_tolerance is an absolute singular-value floor for callers whose `a`
// is residue of a cancellation and may be pure noise at its own scale.
Matrix null_space_basis(const Matrix& a, double min_tolerance = 0.0);

// Orthonormal basis of the column space of `a`; n x rank.
Matrix orthonormal_image_basis(const Matrix& a);

// For symmetric positive definite S returns R with R^T R == S^{-1}
// (R = L^{-1} from S = L L^T).  Throws NumericalError if S is not PD.
Matrix cholesky_inverse_factor(const Matrix& s);

// Generalized eigenvalues/vectors of the symmetric pencil (m1, m2) with
// m1, m2 PSD, restricted to the image of m2 so the pencil is definite
// there.  Eigenvalues ascending; eigenvectors are columns in the original
// coordinates, m2-orthonormal on the restricted subspace.
// Throws std::invalid_argument if m2 == 0 (empty pencil).
struct GeneralizedEigen {
  Vector values;
  Matrix vectors;
};
GeneralizedEigen generalized_eigenpairs(const Matrix& m1, const Matrix& m2);

// e^{A}: scaling-and-squaring Pade approximation.
Matrix matrix_exponential(const Matrix& a);

// J = int_0^{ts} e^{A tau} dtau, computed from one exponential of the
// augmented matrix [[A, I], [0, 0]] * ts; exact for singular A too.
Matrix exp_integral(const Matrix& a, double ts);

// Default tolerance used by the PSD comparisons below:
// 1e-9 * (1 + max Frobenius norm of the operands).
double psd_default_tol(const Matrix& a, const Matrix& b);

// True when A - B is PSD up to `tol` on the minimum eigenvalue of the
// symmetrized difference; tol < 0 selects psd_default_tol(a, b).
bool psd_geq(const Matrix& a, const Matrix& b, double tol = -1.0);

// psd_geq against zero.
bool is_psd(const Matrix& a, double tol = -1.0);

// Symmetrize: (a + a^T) / 2.
inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Kronecker product I_t (x) a.
Matrix kron_identity(int t, const Matrix& a);

}  // namespace privdet
