#include "privdet/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "privdet/chi2.hpp"
#include "privdet/errors.hpp"
#include "privdet/rng.hpp"

namespace privdet {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double pd_or_nan(Eigen::Index q, double lambda, double pfa) {
  if (q < 1) return std::numeric_limits<double>::quiet_NaN();
  return detection_probability(static_cast<int>(q), lambda, pfa).p_detect;
}

}  // namespace

TradeoffReport compare_mechanism_sets(
    const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& mechanisms1,
    const std::vector<PrivacyMechanism>& mechanisms2, int T,
    double p_false_alarm, const std::vector<Vector>& attacks,
    std::size_t detector_index) {
  const DetectionSetup s1 =
      build_setup(batch_structure(system, mechanisms1, T, detector_index));
  const DetectionSetup s2 =
      build_setup(batch_structure(system, mechanisms2, T, detector_index));

  TradeoffReport rep;
  rep.q1 = s1.q;
  rep.q2 = s2.q;
  rep.Lambda1 = s1.Lambda;
  rep.Lambda2 = s2.Lambda;

  if (s2.Lambda.isZero(0.0)) {
    rep.mu_min = rep.mu_max = std::numeric_limits<double>::quiet_NaN();
  } else {
    const GeneralizedEigen ge = generalized_eigenpairs(s1.Lambda, s2.Lambda);
    rep.mu_min = ge.values(0);
    rep.mu_max = ge.values(ge.values.size() - 1);
  }

  // Definition-1 verdicts, neighbor by neighbor.
  std::size_t m = 0;
  rep.set2_more_private = true;
  for (std::size_t j = 0; j < system.subsystems.size(); ++j) {
    if (j == detector_index) continue;
    const auto& sub = system.subsystems[j];
    rep.privacy.push_back(is_more_private(mechanisms2[m], mechanisms1[m],
                                          sub.C, sub.sigma_v, T));
    rep.set2_more_private =
        rep.set2_more_private && rep.privacy.back().more_private;
    ++m;
  }

  const Matrix image2 = orthonormal_image_basis(s2.Lambda);
  for (const Vector& a : attacks) {
    require(a.size() == s1.Lambda.rows(),
            "compare_mechanism_sets: attack vector length mismatch");
    AttackComparison c;
    c.lambda1 = std::max(0.0, a.dot(s1.Lambda * a));
    c.lambda2 = std::max(0.0, a.dot(s2.Lambda * a));
    c.pd1 = pd_or_nan(s1.q, c.lambda1, p_false_alarm);
    c.pd2 = pd_or_nan(s2.q, c.lambda2, p_false_alarm);
    c.tradeoff = c.pd2 <= c.pd1 + 1e-12;
    c.in_pencil_domain =
        (a - image2 * (image2.transpose() * a)).norm() <=
        1e-8 * (1.0 + a.norm());
    rep.attacks.push_back(c);
  }
  return rep;
}

std::vector<RegionPoint> admissible_region(
    const Matrix& lambda1, const Matrix& lambda2, Eigen::Index q1,
    Eigen::Index q2, const std::vector<std::pair<double, double>>& grid,
    double p_false_alarm) {
  require(!lambda2.isZero(0.0),
          "admissible_region: Lambda2 == 0 gives an empty pencil");
  const GeneralizedEigen ge = generalized_eigenpairs(lambda1, lambda2);
  const double mu_min = ge.values(0);
  const double mu_max = ge.values(ge.values.size() - 1);

  std::vector<RegionPoint> out;
  out.reserve(grid.size());
  for (const auto& [x, y] : grid) {
    require(x >= 0.0 && y >= 0.0,
            "admissible_region: noncentrality grid must be nonnegative");
    RegionPoint p;
    p.lambda2 = x;
    p.lambda1 = y;
    const double tol = 1e-9 * (1.0 + x + y);
    p.admissible = (y >= mu_min * x - tol) && (y <= mu_max * x + tol);
    p.pd1 = pd_or_nan(q1, y, p_false_alarm);
    p.pd2 = pd_or_nan(q2, x, p_false_alarm);
    out.push_back(p);
  }
  return out;
}

std::vector<NoiseScalePoint> strict_tradeoff_check(
    const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& base_mechanisms,
    const std::vector<double>& noise_scales, const AttackSignal& attack,
    double p_false_alarm, std::size_t detector_index) {
  require(!noise_scales.empty(), "strict_tradeoff_check: no noise scales");
  require(attack.subsystem == detector_index,
          "strict_tradeoff_check: attack must target the detector subsystem");
  for (double s : noise_scales) {
    require(s >= 0.0, "strict_tradeoff_check: negative noise scale");
  }

  const Vector a = stack_attack(system.subsystems.at(detector_index).B_a,
                                attack.values);

  std::vector<NoiseScalePoint> curve;
  for (double scale : noise_scales) {
    std::vector<PrivacyMechanism> mechs = base_mechanisms;
    for (auto& mech : mechs) mech.sigma_r = (scale * scale) * mech.sigma_r;
    const DetectionSetup setup = build_setup(
        batch_structure(system, mechs,
                        static_cast<int>(attack.values.size()),
                        detector_index));
    const DetectionParameters dp = detection_parameters(setup, a);
    NoiseScalePoint p;
    p.scale = scale;
    p.q = dp.q;
    p.lambda = dp.lambda;
    p.p_detect = pd_or_nan(dp.q, dp.lambda, p_false_alarm);
    curve.push_back(p);
  }

  // Identical selection maps across scales force a constant q ...
  for (const auto& p : curve) {
    if (p.q != curve.front().q) {
      throw NumericalError("strict_tradeoff_check: q varied across scales");
    }
  }
  // ... and P_D must fall (weakly) as the noise grows.
  std::vector<NoiseScalePoint> sorted = curve;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a_, const auto& b_) { return a_.scale < b_.scale; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].p_detect >
        sorted[i - 1].p_detect + 1e-9 * (1.0 + sorted[i - 1].p_detect)) {
      throw NumericalError(
          "strict_tradeoff_check: detection probability increased with noise");
    }
  }
  return curve;
}

NoiseDesignProblem build_noise_design(
    const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& mechanisms, int T,
    const std::vector<double>& desired_privacy, std::size_t detector_index) {
  const BatchStructure batch =
      batch_structure(system, mechanisms, T, detector_index);
  require(desired_privacy.size() == mechanisms.size(),
          "build_noise_design: need one privacy target per neighbor");

  if (numerical_rank(batch.F_a).rank != batch.F_a.rows()) {
    throw InfeasibleDesign(
        "build_noise_design: F(I) must have full row rank");
  }
  std::size_t m = 0;
  for (std::size_t j = 0; j < system.subsystems.size(); ++j) {
    if (j == detector_index) continue;
    const auto& sub = system.subsystems[j];
    const auto& mech = mechanisms[m++];
    if (mech.shared_dim() == 0) {
      throw InfeasibleDesign(
          "build_noise_design: every neighbor must share something");
    }
    if (numerical_rank(sub.C).rank != sub.C.rows()) {
      throw InfeasibleDesign("build_noise_design: C must have full row rank");
    }
    if (numerical_rank(Matrix(mech.S * sub.C)).rank != mech.shared_dim()) {
      throw InfeasibleDesign(
          "build_noise_design: S C must have full row rank");
    }
  }

  const DetectionSetup setup = build_setup(batch);
  const Matrix mtfa_pinv = pinv(setup.MtFa);
  const Matrix proj_a = mtfa_pinv * setup.MtFa;  // (T n_det)^2 projector
  const Eigen::Index n_det = batch.n_det;

  // D = sum of the diagonal n_det-blocks of the attack-space projector.
  Matrix d_sum = Matrix::Zero(n_det, n_det);
  for (int i = 0; i < T; ++i) {
    d_sum += proj_a.block(i * n_det, i * n_det, n_det, n_det);
  }
  const Matrix k1 = batch.B_det * pinv(batch.sc_step);
  const Matrix L = symmetrize(k1.transpose() * d_sum * k1);

  NoiseDesignProblem prob;
  prob.T = T;
  prob.L = L;
  prob.block_dims = batch.shared_dims;
  prob.l = (mtfa_pinv * setup.M.transpose() * batch.sigma_vL * setup.M *
            mtfa_pinv.transpose())
               .trace() +
           (proj_a *
            kron_identity(T, Matrix(k1 * batch.meas_noise_step *
                                    k1.transpose())))
               .trace();

  Eigen::Index off = 0;
  m = 0;
  for (std::size_t j = 0; j < system.subsystems.size(); ++j) {
    if (j == detector_index) continue;
    const auto& sub = system.subsystems[j];
    const auto& mech = mechanisms[m];
    const Eigen::Index mdim = mech.shared_dim();
    const Matrix sc = mech.S * sub.C;
    const Matrix sc_pinv = pinv(sc);
    prob.G.push_back(symmetrize(sc_pinv.transpose() * sc_pinv));
    prob.g.push_back(
        T * (sc_pinv * (mech.S * sub.sigma_v * mech.S.transpose()) *
             sc_pinv.transpose())
                .trace());
    prob.L_blocks.push_back(L.block(off, off, mdim, mdim));
    prob.eps_desired.push_back(desired_privacy[m]);
    prob.eps.push_back(std::max(0.0, (desired_privacy[m] - prob.g.back()) / T));
    off += mdim;
    ++m;
  }

  // Self-check the two trace identities on seeded random noise draws.
  for (int trial = 0; trial < 2; ++trial) {
    std::vector<PrivacyMechanism> noisy = mechanisms;
    GaussianStream stream(derive_seed(0x6e015edULL, 97 + trial, 3));
    for (auto& mech : noisy) {
      const Eigen::Index mdim = mech.shared_dim();
      Matrix w(mdim, mdim);
      for (Eigen::Index r = 0; r < mdim; ++r) w.row(r) = stream.draw(mdim);
      mech.sigma_r = symmetrize(w * w.transpose() / double(mdim) +
                                0.3 * Matrix::Identity(mdim, mdim));
    }
    const DetectionSetup noisy_setup =
        build_setup(batch_structure(system, noisy, T, detector_index));
    double traced = prob.l;
    for (std::size_t k = 0; k < noisy.size(); ++k) {
      traced += (prob.L_blocks[k] * noisy[k].sigma_r).trace();
    }
    const double direct = pinv(noisy_setup.Lambda).trace();
    if (std::abs(direct - traced) > 1e-8 * (1.0 + std::abs(direct))) {
      throw NumericalError(
          "build_noise_design: Tr(Lambda^+) identity failed");
    }
    m = 0;
    for (std::size_t j = 0; j < system.subsystems.size(); ++j) {
      if (j == detector_index) continue;
      const auto& sub = system.subsystems[j];
      const PrivacyAssessment pa =
          assess_privacy(noisy[m], sub.C, sub.sigma_v, T);
      const double lhs = pa.sigma_e.trace();
      const double rhs =
          prob.g[m] + T * (prob.G[m] * noisy[m].sigma_r).trace();
      if (std::abs(lhs - rhs) > 1e-8 * (1.0 + std::abs(lhs))) {
        throw NumericalError(
            "build_noise_design: Tr(sigma_e) identity failed");
      }
      ++m;
    }
  }
  return prob;
}

NoiseDesignSolution solve_noise_design(const NoiseDesignProblem& problem) {
  NoiseDesignSolution sol;
  sol.cost = problem.l;
  for (std::size_t j = 0; j < problem.G.size(); ++j) {
    const Eigen::Index mdim = problem.block_dims[j];
    const Matrix& g = problem.G[j];
    const Matrix& lb = problem.L_blocks[j];
    if (problem.eps[j] <= 0.0) {
      sol.sigma.push_back(Matrix::Zero(mdim, mdim));
      continue;
    }
    if (numerical_rank(g).rank != mdim) {
      throw InfeasibleDesign(
          "solve_noise_design: privacy gain matrix is singular");
    }
    Vector v;
    double mu = 0.0;
    if (lb.norm() <= 1e-14 * (1.0 + problem.L.norm())) {
      // Free privacy: any direction works; take the best one.
      Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      v = es.eigenvectors().col(mdim - 1);
    } else {
      const GeneralizedEigen ge = generalized_eigenpairs(lb, g);
      mu = std::max(0.0, ge.values(0));
      v = ge.vectors.col(0);
      // Certificate of global optimality of the smallest pencil root.
      if (!psd_geq(lb, mu * g, 1e-7 * (1.0 + lb.norm()))) {
        throw NumericalError(
            "solve_noise_design: optimality certificate failed");
      }
    }
    const double denom = v.dot(g * v);
    if (!(denom > 0.0)) {
      throw InfeasibleDesign("solve_noise_design: degenerate direction");
    }
    const Matrix sigma =
        symmetrize((problem.eps[j] / denom) * (v * v.transpose()));
    sol.sigma.push_back(sigma);
    sol.cost += (lb * sigma).trace();
  }
  return sol;
}

}  // namespace privdet
