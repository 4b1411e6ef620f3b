#pragma once

#include <cstdint>
#include <vector>

#include "privdet/linalg.hpp"
#include "privdet/privacy.hpp"
#include "privdet/system_model.hpp"

namespace privdet {

// Lower block-Toeplitz impulse map over horizon T: block (i, j) equals
// C A^{i-j} Z for i >= j (block rows i = 1..T, block columns j = 1..T),
// zero above the diagonal.  Satisfies F(Z) == F(I) (I_T (x) Z).
Matrix toeplitz_block(const Matrix& C, const Matrix& A, const Matrix& Z,
                      int T);

// Stacked powers [ (C A)^T (C A^2)^T ... (C A^T)^T ]^T.
Matrix observability_stack(const Matrix& C, const Matrix& A, int T);

// All horizon-T batch operators of the detector's measurement equation
//   y_L = O x1(0) + F_x xbar + F_a a + F_w wbar + vbar,
//   y_R = H xbar + shared noise,
// where xbar stacks the neighbor states over k = 0..T-1 and a stacks the
// state-space attack inputs B_a[det] atilde(k).
struct BatchStructure {
  int T = 0;
  std::size_t detector_index = 0;
  Eigen::Index n_det = 0;   // detector state dim
  Eigen::Index p_det = 0;   // detector output dim
  Eigen::Index n_nb = 0;    // stacked neighbor state dim
  Eigen::Index m_step = 0;  // shared dim per step

  Matrix O;          // (T p_det) x n_det
  Matrix F_x;        // (T p_det) x (T n_nb)
  Matrix F_a;        // (T p_det) x (T n_det); equals F(I)
  Matrix sigma_vL;   // local batch covariance, (T p_det)^2
  Matrix H;          // (T m_step) x (T n_nb)
  Matrix sigma_vR;   // shared batch covariance, (T m_step)^2
  Matrix sc_step;          // blockdiag S_j C_j, m_step x n_nb
  Matrix share_noise_step; // blockdiag (S_j sigma_vj S_j^T + sigma_rj)
  Matrix meas_noise_step;  // blockdiag (S_j sigma_vj S_j^T)
  Matrix B_det;            // detector's coupling B, n_det x n_nb
  std::vector<Eigen::Index> shared_dims;  // per-neighbor m_j
};

BatchStructure batch_structure(const InterconnectedSystem& system,
                               const std::vector<PrivacyMechanism>& mechanisms,
                               int T, std::size_t detector_index = 0);

// Residual filter + GLRT geometry derived from a BatchStructure:
//   z = M^T y_L - shared_map y_R,  cov(z) = sigma_vP,
//   t(z) = || U^T R z ||^2  ~  chi2(q) under H0.
struct DetectionSetup {
  int T = 0;
  std::size_t detector_index = 0;
  Matrix M;             // columns span the kernel of (F_x (I - P))^T
  Matrix H_tilde;       // H^T sigma_vR^{-1} H
  Matrix H_tilde_pinv;
  Matrix shared_map;    // M^T F_x H_tilde^+ H^T sigma_vR^{-1}
  Matrix sigma_vP;      // residual covariance (PD)
  Matrix R;             // R^T R = sigma_vP^{-1}
  Matrix MtFa;          // M^T F_a: attack-to-residual map
  Matrix U;             // orthonormal basis of Im(R MtFa)
  Matrix Lambda;        // (R MtFa)^T (R MtFa)
  Eigen::Index q = 0;   // rank(MtFa): chi-squared degrees of freedom
};

// Throws DegenerateSetup when the shared data explains every local
// measurement direction (empty residual space) and NumericalError when a
// required covariance is not PD.
DetectionSetup build_setup(const BatchStructure& batch);

// Same, but with a caller-supplied full-column-rank M whose columns must
// annihilate F_x (I - P); lets tests check basis invariance of (t, q).
DetectionSetup build_setup_with_basis(const BatchStructure& batch,
                                      const Matrix& M);

// Stacked measurement batches of one trajectory: the detector's own
// outputs k = 1..T and the privacy-screened neighbor outputs k = 0..T-1.
struct AggregatedBatch {
  Vector y_L;
  Vector y_R;
  int T = 0;
  std::size_t detector_index = 0;
};

AggregatedBatch aggregate(const InterconnectedSystem& system,
                          const Trajectory& trajectory,
                          const std::vector<PrivacyMechanism>& mechanisms,
                          std::uint64_t privacy_seed,
                          std::size_t detector_index = 0);

// z: the neighbor-state-free residual.
Vector residual(const DetectionSetup& setup, const Vector& y_L,
                const Vector& y_R);
Vector residual(const DetectionSetup& setup, const AggregatedBatch& batch);

struct TestResult {
  double statistic = 0.0;
  double threshold = 0.0;
  double p_false_alarm = 0.0;
  bool attack_detected = false;
};

// chi-squared GLRT at false-alarm rate p_false_alarm; throws
// NoTestPossible when q == 0.
TestResult glrt(const DetectionSetup& setup, const Vector& z,
                double p_false_alarm);

// (q, lambda) of the stacked state-space attack vector a (length T n_det):
// lambda = a^T Lambda a.
struct DetectionParameters {
  Eigen::Index q = 0;
  double lambda = 0.0;
};
DetectionParameters detection_parameters(const DetectionSetup& setup,
                                         const Vector& a);

// Stacks B_a * atilde(k) over k = 0..T-1 into the state-space attack
// vector used by detection_parameters.
Vector stack_attack(const Matrix& B_a, const std::vector<Vector>& values);

// True when every attack through B_a is invisible to a detector whose
// neighbors share through S (with output map C): Im(B_a) lies inside
// B (I - (S C)^+ (S C)) kernel-of-sharing directions.
bool undetectable(const Matrix& B_a, const Matrix& B, const Matrix& S,
                  const Matrix& C);

}  // namespace privdet
