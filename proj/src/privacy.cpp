#include "privdet/privacy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "privdet/errors.hpp"

namespace privdet {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void PrivacyMechanism::validate() const {
  if (S.rows() == 0) {
    require(sigma_r.rows() == 0 && sigma_r.cols() == 0,
            "mechanism: sigma_r must be empty when nothing is shared");
    return;
  }
  require(S.cols() > 0, "mechanism: S has no input columns");
  require(sigma_r.rows() == S.rows() && sigma_r.cols() == S.rows(),
          "mechanism: sigma_r shape must match shared dimension");
  require((sigma_r - sigma_r.transpose()).norm() <=
              1e-10 * (1.0 + sigma_r.norm()),
          "mechanism: sigma_r not symmetric");
  require(is_psd(sigma_r), "mechanism: sigma_r not PSD");
  require(numerical_rank(S).rank == S.rows(),
          "mechanism: S must have full row rank");
}

Eigen::Index PrivacyAssessment::rank() const {
  return static_cast<Eigen::Index>(std::lround(projector.trace()));
}

PrivacyAssessment assess_privacy(const PrivacyMechanism& mech,
                                 const Matrix& C, const Matrix& sigma_v,
                                 int T) {
  mech.validate();
  require(T >= 1, "assess_privacy: horizon must be >= 1");
  require(C.rows() > 0 && C.cols() > 0, "assess_privacy: empty C");
  require(sigma_v.rows() == C.rows() && sigma_v.cols() == C.rows(),
          "assess_privacy: sigma_v must match output dimension");

  const Eigen::Index n = C.cols();
  PrivacyAssessment a;
  a.T = T;
  if (mech.shared_dim() == 0) {
    a.H = Matrix::Zero(0, T * n);
    a.sigma_shared = Matrix::Zero(0, 0);
    a.H_tilde = Matrix::Zero(T * n, T * n);
    a.projector = Matrix::Zero(T * n, T * n);
    a.sigma_e = Matrix::Zero(T * n, T * n);
    return a;
  }
  require(mech.S.cols() == C.rows(),
          "assess_privacy: S must act on the output dimension");

  const Matrix sc = mech.S * C;
  const Matrix noise_step =
      symmetrize(mech.S * sigma_v * mech.S.transpose() + mech.sigma_r);
  Eigen::LLT<Matrix> llt(noise_step);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(
        "assess_privacy: shared-noise covariance not positive definite");
  }
  const Matrix htilde_step = symmetrize(sc.transpose() * llt.solve(sc));

  a.H = kron_identity(T, sc);
  a.sigma_shared = kron_identity(T, noise_step);
  a.H_tilde = kron_identity(T, htilde_step);
  const Matrix step_pinv = pinv(htilde_step);
  a.sigma_e = kron_identity(T, step_pinv);
  a.projector = kron_identity(T, symmetrize(step_pinv * htilde_step));
  return a;
}

Vector ml_state_estimate(const PrivacyAssessment& a,
                         const Vector& shared_batch) {
  require(shared_batch.size() == a.H.rows(),
          "ml_state_estimate: batch length mismatch");
  if (a.H.rows() == 0) return Vector::Zero(a.H.cols());
  Eigen::LLT<Matrix> llt(a.sigma_shared);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("ml_state_estimate: shared covariance not PD");
  }
  return a.sigma_e * (a.H.transpose() * llt.solve(shared_batch));
}

PrivacyComparison is_more_private(const PrivacyMechanism& candidate,
                                  const PrivacyMechanism& baseline,
                                  const Matrix& C, const Matrix& sigma_v,
                                  int T, double tol) {
  candidate.validate();
  baseline.validate();
  require(candidate.S.cols() == 0 || baseline.S.cols() == 0 ||
              candidate.S.cols() == baseline.S.cols(),
          "is_more_private: mechanisms act on different output spaces");

  PrivacyComparison cmp;
  // (i) Im(candidate.S^T) inside Im(baseline.S^T).
  if (candidate.shared_dim() == 0) {
    cmp.subspace_contained = true;
  } else if (baseline.shared_dim() == 0) {
    cmp.subspace_contained = false;
  } else {
    Matrix joint(candidate.S.cols(),
                 candidate.S.rows() + baseline.S.rows());
    joint.leftCols(baseline.S.rows()) = baseline.S.transpose();
    joint.rightCols(candidate.S.rows()) = candidate.S.transpose();
    cmp.subspace_contained =
        numerical_rank(joint).rank == numerical_rank(baseline.S).rank;
  }

  // (ii) candidate error covariance dominates the baseline's on the
  // candidate's observable subspace.
  const PrivacyAssessment ac = assess_privacy(candidate, C, sigma_v, T);
  const PrivacyAssessment ab = assess_privacy(baseline, C, sigma_v, T);
  cmp.covariance_dominated =
      psd_geq(ac.sigma_e, ac.projector * ab.sigma_e * ac.projector, tol);

  cmp.more_private = cmp.subspace_contained && cmp.covariance_dominated;
  return cmp;
}

bool sufficient_condition_more_private(const PrivacyMechanism& candidate,
                                       const PrivacyMechanism& baseline,
                                       double tol) {
  candidate.validate();
  baseline.validate();
  if (candidate.shared_dim() == 0) return true;
  if (baseline.shared_dim() == 0) return false;
  require(candidate.S.cols() == baseline.S.cols(),
          "sufficient_condition: mechanisms act on different output spaces");

  const Matrix p = candidate.S * pinv(baseline.S);
  const double row_tol =
      tol >= 0.0 ? tol : 1e-9 * (1.0 + candidate.S.norm());
  if ((candidate.S - p * baseline.S).norm() > row_tol) return false;
  return psd_geq(candidate.sigma_r,
                 symmetrize(p * baseline.sigma_r * p.transpose()), tol);
}

PrivacyMechanism post_process(const PrivacyMechanism& base, const Matrix& S,
                              const Matrix& sigma_n) {
  base.validate();
  require(S.cols() == base.S.rows(),
          "post_process: map must act on the base shared dimension");
  require(sigma_n.rows() == S.rows() && sigma_n.cols() == S.rows(),
          "post_process: sigma_n shape mismatch");
  PrivacyMechanism out;
  out.S = S * base.S;
  out.sigma_r = symmetrize(S * base.sigma_r * S.transpose() + sigma_n);
  out.validate();
  return out;
}

}  // namespace privdet
