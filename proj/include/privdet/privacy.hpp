#pragma once

#include "privdet/linalg.hpp"

namespace privdet {

// Output-sharing mechanism y_shared = S y + r with r ~ N(0, sigma_r).
// S may have zero rows (share nothing); when nonempty it must have full
// row rank so no shared coordinate is redundant.
struct PrivacyMechanism {
  Matrix S;        // m x p, m >= 0
  Matrix sigma_r;  // m x m, PSD

  Eigen::Index shared_dim() const { return S.rows(); }

  // Throws std::invalid_argument on dimension mismatch, rank deficiency
  // of S, or non-PSD sigma_r.
  void validate() const;
};

// Batch-level view of a mechanism against output map C (p x n) and
// measurement covariance sigma_v over a horizon T: what an adversary that
// observes T shared samples can reconstruct about the state batch.
struct PrivacyAssessment {
  int T = 0;
  Matrix H;             // (T m) x (T n): I_T (x) S C
  Matrix sigma_shared;  // (T m) x (T m): I_T (x) (S sigma_v S^T + sigma_r)
  Matrix H_tilde;       // H^T sigma_shared^{-1} H (information matrix)
  Matrix projector;     // H_tilde^+ H_tilde: observable-subspace projector
  Matrix sigma_e;       // H_tilde^+: estimation-error covariance (MVU part)
  Eigen::Index rank() const;
};

PrivacyAssessment assess_privacy(const PrivacyMechanism& mech,
                                 const Matrix& C, const Matrix& sigma_v,
                                 int T);

// Minimum-variance unbiased estimate of the stacked state from the stacked
// shared batch (least squares with the unobservable component set to 0).
Vector ml_state_estimate(const PrivacyAssessment& assessment,
                         const Vector& shared_batch);

// Componentwise result of the privacy preorder test "is `candidate` at
// least as private as `baseline`?":
//   subspace_contained:    Im(candidate.S^T) subset of Im(baseline.S^T);
//   covariance_dominated:  sigma_e(candidate) >= P sigma_e(baseline) P
//                          with P the candidate's observable projector;
//   more_private = both.
struct PrivacyComparison {
  bool subspace_contained = false;
  bool covariance_dominated = false;
  bool more_private = false;
};

PrivacyComparison is_more_private(const PrivacyMechanism& candidate,
                                  const PrivacyMechanism& baseline,
                                  const Matrix& C, const Matrix& sigma_v,
                                  int T, double tol = -1.0);

// Sufficient condition that avoids forming batch matrices: with
// P = candidate.S * pinv(baseline.S), requires candidate.S == P baseline.S
// (row-space containment) and candidate.sigma_r >= P baseline.sigma_r P^T.
// Implies is_more_private for every C, sigma_v, T.
bool sufficient_condition_more_private(const PrivacyMechanism& candidate,
                                       const PrivacyMechanism& baseline,
                                       double tol = -1.0);

// Post-processing construction: feeding a mechanism's output through map S
// and adding fresh noise sigma_n gives
//   (S * base.S, S base.sigma_r S^T + sigma_n),
// which is never less private than the base mechanism.
PrivacyMechanism post_process(const PrivacyMechanism& base, const Matrix& S,
                              const Matrix& sigma_n);

}  // namespace privdet
