#include "privdet/tradeoff.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "privdet/chi2.hpp"
#include "privdet/errors.hpp"
#include "privdet/rng.hpp"
#include "util.hpp"

namespace privdet {
namespace {

using testutil::make_testable_case;
using testutil::nested_mechanisms;
using testutil::random_matrix;
using testutil::random_psd;

std::vector<Vector> pencil_domain_attacks(const Matrix& lambda2, int count,
                                          std::uint64_t seed,
                                          double scale = 3.0) {
  const Matrix v = orthonormal_image_basis(lambda2);
  GaussianStream g(seed);
  std::vector<Vector> attacks;
  for (int i = 0; i < count; ++i) attacks.push_back(scale * (v * g.draw(v.cols())));
  return attacks;
}

TEST(CompareMechanismSets, PencilBoundsHoldOnNestedSets) {
  for (std::uint64_t seed : {7u, 19u, 23u}) {
    const auto pair = testutil::make_nested_pair(seed, 2);
    const auto& rc = pair.base;
    const auto& tighter = pair.tighter;

    auto probe = compare_mechanism_sets(rc.system, rc.mechanisms, tighter,
                                        rc.T, 0.05, {});
    const auto attacks = pencil_domain_attacks(probe.Lambda2, 60, seed + 1);
    const auto report = compare_mechanism_sets(rc.system, rc.mechanisms,
                                               tighter, rc.T, 0.05, attacks);

    EXPECT_GE(report.q1, report.q2);
    EXPECT_TRUE(report.set2_more_private);
    for (const auto& p : report.privacy) EXPECT_TRUE(p.more_private);
    EXPECT_GE(report.mu_min, 1.0 - 1e-7);
    EXPECT_GE(report.mu_max, report.mu_min - 1e-12);

    for (const auto& a : report.attacks) {
      EXPECT_TRUE(a.in_pencil_domain);
      if (a.lambda2 < 1e-10) continue;
      EXPECT_LE(a.lambda1, report.mu_max * a.lambda2 * (1.0 + 1e-7) + 1e-12);
      EXPECT_GE(a.lambda1, report.mu_min * a.lambda2 * (1.0 - 1e-7) - 1e-12);
      EXPECT_GE(a.lambda1, a.lambda2 * (1.0 - 1e-7) - 1e-12);
      EXPECT_NEAR(
          a.pd1,
          detection_probability(int(report.q1), a.lambda1, 0.05).p_detect,
          1e-10);
      EXPECT_NEAR(
          a.pd2,
          detection_probability(int(report.q2), a.lambda2, 0.05).p_detect,
          1e-10);
      EXPECT_EQ(a.tradeoff, a.pd2 <= a.pd1 + 1e-12);
    }
  }
}

TEST(CompareMechanismSets, KernelAttacksAreFlaggedOutsidePencilDomain) {
  const auto pair = testutil::make_nested_pair(31, 2);
  const auto& rc = pair.base;
  const auto& tighter = pair.tighter;
  auto probe =
      compare_mechanism_sets(rc.system, rc.mechanisms, tighter, rc.T, 0.05, {});
  const Matrix kernel = null_space_basis(probe.Lambda2);
  ASSERT_GT(kernel.cols(), 0);  // tighter sharing leaves blind directions
  const auto report = compare_mechanism_sets(
      rc.system, rc.mechanisms, tighter, rc.T, 0.05, {5.0 * kernel.col(0)});
  ASSERT_EQ(report.attacks.size(), 1u);
  EXPECT_FALSE(report.attacks[0].in_pencil_domain);
  EXPECT_NEAR(report.attacks[0].lambda2, 0.0, 1e-9);
}

TEST(AdmissibleRegion, RatioBandClassification) {
  const Matrix lambda1 = 2.0 * Matrix::Identity(2, 2);
  const Matrix lambda2 = Matrix::Identity(2, 2);
  const std::vector<std::pair<double, double>> grid = {
      {1.0, 2.0}, {1.0, 1.0}, {1.0, 2.5}, {4.0, 8.0}, {0.0, 0.0}};
  const auto pts = admissible_region(lambda1, lambda2, 6, 3, grid, 0.05);
  ASSERT_EQ(pts.size(), grid.size());
  EXPECT_TRUE(pts[0].admissible);
  EXPECT_FALSE(pts[1].admissible);
  EXPECT_FALSE(pts[2].admissible);
  EXPECT_TRUE(pts[3].admissible);
  EXPECT_TRUE(pts[4].admissible);  // zero attack achieves (0, 0)
  EXPECT_NEAR(pts[0].pd1, detection_probability(6, 2.0, 0.05).p_detect, 1e-12);
  EXPECT_NEAR(pts[0].pd2, detection_probability(3, 1.0, 0.05).p_detect, 1e-12);
}

TEST(StrictTradeoff, MoreNoiseNeverHelpsTheAttacker) {
  const auto rc = make_testable_case(47, 2);
  AttackSignal attack;
  attack.subsystem = 0;
  const Eigen::Index r = rc.system.subsystems[0].attack_dim();
  attack.values = {Vector::Constant(r, 1.5), Vector::Constant(r, -1.0)};
  const std::vector<double> scales = {0.0, 0.5, 1.0, 2.0, 4.0};
  const auto pts =
      strict_tradeoff_check(rc.system, rc.mechanisms, scales, attack, 0.05);
  ASSERT_EQ(pts.size(), scales.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_DOUBLE_EQ(pts[i].scale, scales[i]);
    EXPECT_EQ(pts[i].q, pts[0].q);
    if (i > 0) {
      EXPECT_LE(pts[i].p_detect, pts[i - 1].p_detect + 1e-9);
      EXPECT_LE(pts[i].lambda, pts[i - 1].lambda + 1e-9);
    }
  }
  EXPECT_GT(pts.front().p_detect, pts.back().p_detect);  // noise does bite
}

// Projected-gradient oracle for one block of the design problem:
//   min Tr(L Sigma)  s.t.  Sigma >= 0,  Tr(G Sigma) >= eps,
// solved in whitened coordinates Y = G^{1/2} Sigma G^{1/2} where the
// feasible set is spectral and the projection is exact.
double pgd_block_cost(const Matrix& L, const Matrix& G, double eps) {
  Eigen::SelfAdjointEigenSolver<Matrix> gs(G);
  const Matrix g_half_inv =
      gs.eigenvectors() *
      gs.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      gs.eigenvectors().transpose();
  const Matrix lt = symmetrize(g_half_inv * L * g_half_inv);

  const auto project = [&](const Matrix& y) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(y));
    Vector lam = es.eigenvalues().cwiseMax(0.0);
    if (lam.sum() < eps) {
      double lo = 0.0, hi = eps;  // shift theta with sum max(lam+theta,0)=eps
      while ((es.eigenvalues().array() + hi).max(0.0).sum() < eps) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((es.eigenvalues().array() + mid).max(0.0).sum() < eps ? lo : hi) = mid;
      }
      lam = (es.eigenvalues().array() + hi).max(0.0);
    }
    return Matrix(es.eigenvectors() * lam.asDiagonal() *
                  es.eigenvectors().transpose());
  };

  Matrix y = project(Matrix::Identity(L.rows(), L.cols()));
  const double step = 0.25 * eps / (1.0 + lt.norm());
  double best = (lt * y).trace();
  for (int it = 0; it < 6000; ++it) {
    y = project(y - step * lt);
    if (it % 200 == 0 || it == 5999) {
      best = std::min(best, (lt * y).trace());
      // Rank-one polish along the iterate's dominant eigenvector.
      Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(y));
      const Vector u = es.eigenvectors().col(es.eigenvalues().size() - 1);
      best = std::min(best, eps * u.dot(lt * u));
    }
  }
  return best;
}

TEST(NoiseDesign, AnalyticOptimumMatchesProjectedGradientOracle) {
  GaussianStream g(501);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 3;
    NoiseDesignProblem prob;
    const Matrix w = testutil::random_matrix(g, n, n);
    prob.L_blocks = {symmetrize(w * w.transpose() / double(n))};
    prob.G = {random_psd(g, n, 0.4)};
    prob.L = prob.L_blocks[0];
    prob.l = 0.0;
    prob.g = {0.0};
    prob.eps = {1.0 + std::abs(g.next())};
    prob.eps_desired = prob.eps;
    prob.block_dims = {n};
    prob.T = 1;

    const auto sol = solve_noise_design(prob);
    ASSERT_EQ(sol.sigma.size(), 1u);
    EXPECT_TRUE(is_psd(sol.sigma[0]));
    EXPECT_GE((prob.G[0] * sol.sigma[0]).trace(), prob.eps[0] - 1e-9);

    const double oracle = pgd_block_cost(prob.L_blocks[0], prob.G[0], prob.eps[0]);
    EXPECT_NEAR(sol.cost, oracle, 1e-6 * (1.0 + std::abs(oracle)))
        << "trial " << trial;
  }
}

TEST(NoiseDesign, DiagonalBlockClosedForm) {
  NoiseDesignProblem prob;
  Matrix L = Matrix::Zero(2, 2);
  L(0, 0) = 1.0;
  L(1, 1) = 2.0;
  prob.L_blocks = {L};
  prob.L = L;
  prob.G = {Matrix::Identity(2, 2)};
  prob.l = 0.0;
  prob.g = {0.0};
  prob.eps = {3.0};
  prob.eps_desired = {3.0};
  prob.block_dims = {2};
  prob.T = 1;
  const auto sol = solve_noise_design(prob);
  EXPECT_NEAR(sol.cost, 3.0, 1e-10);  // eps * mu_min with mu_min = 1
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 3.0;
  EXPECT_LT((sol.sigma[0] - want).norm(), 1e-9);
}

TEST(NoiseDesign, MetPrivacyFloorCostsNothing) {
  NoiseDesignProblem prob;
  prob.L_blocks = {Matrix::Identity(2, 2)};
  prob.L = Matrix::Identity(2, 2);
  prob.G = {Matrix::Identity(2, 2)};
  prob.l = 4.0;
  prob.g = {5.0};
  prob.eps = {0.0};  // desired floor already met by measurement noise
  prob.eps_desired = {2.0};
  prob.block_dims = {2};
  prob.T = 1;
  const auto sol = solve_noise_design(prob);
  EXPECT_NEAR(sol.cost, 4.0, 1e-12);
  EXPECT_LT(sol.sigma[0].norm(), 1e-12);
}

TEST(NoiseDesign, TraceIdentitiesHoldOnRealSystem) {
  const auto rc = make_testable_case(61, 2);
  const std::vector<double> desired(rc.mechanisms.size(), 0.0);
  const auto prob =
      build_noise_design(rc.system, rc.mechanisms, rc.T, desired);

  GaussianStream g(613);
  auto noisy = rc.mechanisms;
  std::vector<Matrix> draws;
  for (auto& m : noisy) {
    draws.push_back(random_psd(g, m.shared_dim(), 0.2));
    m.sigma_r = draws.back();
  }

  // Identity 1: Tr(Lambda^+) = l + sum_j Tr(L_j Sigma_j).
  const auto setup = build_setup(batch_structure(rc.system, noisy, rc.T));
  double rhs = prob.l;
  for (std::size_t j = 0; j < draws.size(); ++j)
    rhs += (prob.L_blocks[j] * draws[j]).trace();
  const double lhs = pinv(setup.Lambda).trace();
  EXPECT_NEAR(lhs, rhs, 1e-8 * (1.0 + std::abs(lhs)));

  // Identity 2: Tr(sigma_e_j) = g_j + T Tr(G_j Sigma_j) per neighbor.
  for (std::size_t j = 0; j < noisy.size(); ++j) {
    const auto& nb = rc.system.subsystems[j + 1];
    const auto assessment =
        assess_privacy(noisy[j], nb.C, nb.sigma_v, rc.T);
    const double want = prob.g[j] + prob.T * (prob.G[j] * draws[j]).trace();
    EXPECT_NEAR(assessment.sigma_e.trace(), want,
                1e-8 * (1.0 + std::abs(want)));
  }

  // The transformed targets clamp at zero and rescale by the horizon.
  std::vector<double> ambitious(rc.mechanisms.size());
  for (std::size_t j = 0; j < ambitious.size(); ++j)
    ambitious[j] = prob.g[j] + 3.0 * prob.T;
  const auto prob2 =
      build_noise_design(rc.system, rc.mechanisms, rc.T, ambitious);
  for (std::size_t j = 0; j < ambitious.size(); ++j)
    EXPECT_NEAR(prob2.eps[j], 3.0, 1e-9);
  const auto sol = solve_noise_design(prob2);
  for (std::size_t j = 0; j < sol.sigma.size(); ++j) {
    EXPECT_TRUE(is_psd(sol.sigma[j]));
    EXPECT_GE((prob2.G[j] * sol.sigma[j]).trace(), prob2.eps[j] - 1e-8);
  }
  EXPECT_GE(sol.cost, prob2.l - 1e-9);
}

TEST(NoiseDesign, RejectsRankDeficientSharingGeometry) {
  auto rc = make_testable_case(71, 2);
  // Collapse one neighbor's output map; S_j C_j loses row rank.
  rc.system.subsystems[1].C.row(0) =
      rc.system.subsystems[1].C.row(1);
  EXPECT_THROW(build_noise_design(rc.system, rc.mechanisms, rc.T,
                                  std::vector<double>(rc.mechanisms.size(), 0.0)),
               InfeasibleDesign);
}

}  // namespace
}  // namespace privdet
