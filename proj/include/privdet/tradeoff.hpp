#pragma once

#include <cstdint>
#include <vector>

#include "privdet/detector.hpp"
#include "privdet/linalg.hpp"
#include "privdet/privacy.hpp"
#include "privdet/system_model.hpp"

namespace privdet {

// One attack evaluated against two mechanism sets.
struct AttackComparison {
  double lambda1 = 0.0;  // under mechanism set 1
  double lambda2 = 0.0;  // under mechanism set 2
  double pd1 = 0.0;
  double pd2 = 0.0;
  bool tradeoff = false;  // pd2 <= pd1: more privacy cost detection
  // True when the attack lies in the image of Lambda2 (up to tolerance);
  // the pencil bounds below are only guaranteed on that subspace.
  bool in_pencil_domain = false;
};

// Security comparison of two privacy configurations for the same system.
struct TradeoffReport {
  Eigen::Index q1 = 0;
  Eigen::Index q2 = 0;
  Matrix Lambda1;
  Matrix Lambda2;
  // Extremal generalized eigenvalues of (Lambda1, Lambda2) on Im(Lambda2);
  // for attacks in that image, lambda2 * mu_min <= lambda1 <= lambda2 * mu_max.
  double mu_min = 0.0;
  double mu_max = 0.0;
  // Componentwise Definition-1 verdicts per neighbor (set 2 vs set 1).
  std::vector<PrivacyComparison> privacy;
  bool set2_more_private = false;
  std::vector<AttackComparison> attacks;
};

TradeoffReport compare_mechanism_sets(
    const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& mechanisms1,
    const std::vector<PrivacyMechanism>& mechanisms2, int T,
    double p_false_alarm, const std::vector<Vector>& attacks,
    std::size_t detector_index = 0);

// Grid classification of the (lambda2, lambda1) plane: a pair is
// achievable by some attack iff lambda1/lambda2 lies in [mu_min, mu_max].
struct RegionPoint {
  double lambda2 = 0.0;
  double lambda1 = 0.0;
  bool admissible = false;
  double pd1 = 0.0;  // detection probability at (q1, lambda1)
  double pd2 = 0.0;  // detection probability at (q2, lambda2)
};

std::vector<RegionPoint> admissible_region(
    const Matrix& lambda1, const Matrix& lambda2, Eigen::Index q1,
    Eigen::Index q2, const std::vector<std::pair<double, double>>& grid,
    double p_false_alarm);

// Detection probability of one fixed attack as the shared-noise standard
// deviation is scaled: mechanism m gets covariance (scale^2) sigma_r.
// q stays constant across scales and P_D is nonincreasing (checked).
struct NoiseScalePoint {
  double scale = 0.0;
  Eigen::Index q = 0;
  double lambda = 0.0;
  double p_detect = 0.0;
};

std::vector<NoiseScalePoint> strict_tradeoff_check(
    const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& base_mechanisms,
    const std::vector<double>& noise_scales, const AttackSignal& attack,
    double p_false_alarm, std::size_t detector_index = 0);

// Data of the shared-noise design problem
//   min Tr(L sigma) + l  s.t.  Tr(G_j sigma_j) >= eps_j,  sigma_j PSD,
// which trades the detector's attack-identification accuracy Tr(Lambda^+)
// against per-neighbor privacy floors Tr(sigma_e_j) >= eps_desired_j.
struct NoiseDesignProblem {
  Matrix L;                    // block-diagonal cost matrix, one block per neighbor
  double l = 0.0;              // noise-independent part of Tr(Lambda^+)
  std::vector<Matrix> L_blocks;
  std::vector<Matrix> G;       // per-neighbor privacy gain matrices (PD)
  std::vector<double> g;       // per-neighbor noise-free privacy floor
  std::vector<double> eps;     // transformed targets, clamped at 0
  std::vector<double> eps_desired;
  std::vector<Eigen::Index> block_dims;
  int T = 0;
};

// Requires F(I), every C_j, and every S_j C_j to have full row rank
// (throws InfeasibleDesign otherwise).  Self-checks the two trace
// identities it is built on against directly assembled batch quantities.
NoiseDesignProblem build_noise_design(
    const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& mechanisms, int T,
    const std::vector<double>& desired_privacy,
    std::size_t detector_index = 0);

struct NoiseDesignSolution {
  std::vector<Matrix> sigma;  // optimal per-neighbor shared-noise covariances
  double cost = 0.0;          // optimal Tr(Lambda^+) = l + sum Tr(L_j sigma_j)
};

// Exact per-block solution: each block's optimum is rank one along the
// smallest generalized eigenvector of (L_j, G_j).
NoiseDesignSolution solve_noise_design(const NoiseDesignProblem& problem);

}  // namespace privdet
