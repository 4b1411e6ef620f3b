#include "privdet/detector.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "privdet/chi2.hpp"
#include "privdet/errors.hpp"

namespace privdet {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Matrix toeplitz_block(const Matrix& C, const Matrix& A, const Matrix& Z,
                      int T) {
  require(T >= 1, "toeplitz_block: horizon must be >= 1");
  require(A.rows() == A.cols(), "toeplitz_block: A not square");
  require(C.cols() == A.rows(), "toeplitz_block: C/A mismatch");
  require(Z.rows() == A.rows(), "toeplitz_block: Z/A mismatch");
  const Eigen::Index p = C.rows();
  const Eigen::Index c = Z.cols();
  // diag[d] = C A^d Z for d = 0..T-1.
  std::vector<Matrix> diag(T);
  Matrix ca = C;
  for (int d = 0; d < T; ++d) {
    diag[d] = ca * Z;
    if (d + 1 < T) ca = ca * A;
  }
  Matrix f = Matrix::Zero(T * p, T * c);
  for (int i = 0; i < T; ++i) {
    for (int j = 0; j <= i; ++j) {
      f.block(i * p, j * c, p, c) = diag[i - j];
    }
  }
  return f;
}

Matrix observability_stack(const Matrix& C, const Matrix& A, int T) {
  require(T >= 1, "observability_stack: horizon must be >= 1");
  require(A.rows() == A.cols() && C.cols() == A.rows(),
          "observability_stack: dimension mismatch");
  Matrix o(T * C.rows(), A.cols());
  Matrix ca = C;
  for (int i = 0; i < T; ++i) {
    ca = ca * A;
    o.middleRows(i * C.rows(), C.rows()) = ca;
  }
  return o;
}

BatchStructure batch_structure(const InterconnectedSystem& system,
                               const std::vector<PrivacyMechanism>& mechanisms,
                               int T, std::size_t detector_index) {
  system.validate();
  require(T >= 1, "batch_structure: horizon must be >= 1");
  const std::size_t nsub = system.subsystems.size();
  require(detector_index < nsub, "batch_structure: detector index out of range");
  require(mechanisms.size() == nsub - 1,
          "batch_structure: need one mechanism per non-detector subsystem");

  const SubsystemModel& det = system.subsystems[detector_index];
  BatchStructure b;
  b.T = T;
  b.detector_index = detector_index;
  b.n_det = det.state_dim();
  b.p_det = det.output_dim();
  b.n_nb = system.neighbor_dim(detector_index);
  b.B_det = det.B;

  b.O = observability_stack(det.C, det.A, T);
  b.F_x = toeplitz_block(det.C, det.A, det.B, T);
  b.F_a = toeplitz_block(det.C, det.A, Matrix::Identity(b.n_det, b.n_det), T);
  b.sigma_vL = symmetrize(
      b.O * det.sigma_x0 * b.O.transpose() +
      b.F_a * kron_identity(T, det.sigma_w) * b.F_a.transpose() +
      kron_identity(T, det.sigma_v));

  // Per-step shared maps: block diagonal over neighbors in ascending order.
  Eigen::Index m_step = 0;
  std::size_t mi = 0;
  std::vector<const SubsystemModel*> neighbors;
  for (std::size_t j = 0; j < nsub; ++j) {
    if (j == detector_index) continue;
    const auto& mech = mechanisms[mi++];
    mech.validate();
    require(mech.shared_dim() == 0 ||
                mech.S.cols() == system.subsystems[j].output_dim(),
            "batch_structure: mechanism S does not match subsystem output");
    b.shared_dims.push_back(mech.shared_dim());
    m_step += mech.shared_dim();
    neighbors.push_back(&system.subsystems[j]);
  }
  b.m_step = m_step;
  b.sc_step = Matrix::Zero(m_step, b.n_nb);
  b.share_noise_step = Matrix::Zero(m_step, m_step);
  b.meas_noise_step = Matrix::Zero(m_step, m_step);
  Eigen::Index row = 0, col = 0;
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const auto& mech = mechanisms[k];
    const auto& sub = *neighbors[k];
    const Eigen::Index m = mech.shared_dim();
    if (m > 0) {
      b.sc_step.block(row, col, m, sub.state_dim()) = mech.S * sub.C;
      const Matrix meas = mech.S * sub.sigma_v * mech.S.transpose();
      b.meas_noise_step.block(row, row, m, m) = meas;
      b.share_noise_step.block(row, row, m, m) = meas + mech.sigma_r;
    }
    row += m;
    col += sub.state_dim();
  }
  b.H = kron_identity(T, b.sc_step);
  b.sigma_vR = kron_identity(T, symmetrize(b.share_noise_step));
  return b;
}

namespace {

DetectionSetup build_setup_impl(const BatchStructure& b, const Matrix* basis) {
  DetectionSetup s;
  s.T = b.T;
  s.detector_index = b.detector_index;

  Matrix svr_inv_h;  // sigma_vR^{-1} H
  const Eigen::Index tn = b.H.cols();
  if (b.H.rows() == 0) {
    svr_inv_h = Matrix::Zero(0, tn);
    s.H_tilde = Matrix::Zero(tn, tn);
    s.H_tilde_pinv = Matrix::Zero(tn, tn);
  } else {
    Eigen::LLT<Matrix> llt(b.sigma_vR);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("build_setup: shared covariance not positive definite");
    }
    svr_inv_h = llt.solve(b.H);
    s.H_tilde = symmetrize(b.H.transpose() * svr_inv_h);
    s.H_tilde_pinv = pinv(s.H_tilde);
  }

  // Directions of y_L whose dependence on the neighbor states survives the
  // WLS correction; M spans their orthogonal complement.  Null(H_tilde) =
  // Null(H) since sigma_vR is PD, and composing F_x with an orthonormal
  // kernel basis of H instead of the projector I - H_tilde^+ H_tilde keeps
  // pinv cancellation residue out of the rank decision below.
  const Matrix kernel =
      b.H.rows() == 0 ? Matrix::Identity(tn, tn) : null_space_basis(b.H);
  const Matrix d = b.F_x * kernel;
  if (basis) {
    require(basis->rows() == b.F_x.rows(),
            "build_setup_with_basis: basis row dimension mismatch");
    require(numerical_rank(*basis).rank == basis->cols(),
            "build_setup_with_basis: basis must have full column rank");
    require((basis->transpose() * d).norm() <=
                1e-8 * (1.0 + d.norm()) * (1.0 + basis->norm()),
            "build_setup_with_basis: basis does not annihilate the "
            "neighbor-state map");
    s.M = *basis;
  } else {
    // Singular values below the F_x-scale rounding floor are accumulation
    // noise, not directions; the floor also guards the all-zero case where
    // a relative tolerance would promote that noise to rank.
    const double floor_tol =
        static_cast<double>(std::max(d.rows(), d.cols())) *
        std::numeric_limits<double>::epsilon() * b.F_x.norm();
    s.M = null_space_basis(d.transpose(), floor_tol);
  }
  if (s.M.cols() == 0) {
    throw DegenerateSetup(
        "build_setup: no residual directions remain after elimination");
  }

  s.sigma_vP = symmetrize(s.M.transpose() * b.sigma_vL * s.M +
                          s.M.transpose() * b.F_x * s.H_tilde_pinv *
                              b.F_x.transpose() * s.M);
  s.R = cholesky_inverse_factor(s.sigma_vP);
  s.shared_map = s.M.transpose() * b.F_x * s.H_tilde_pinv *
                 svr_inv_h.transpose();

  s.MtFa = s.M.transpose() * b.F_a;
  s.q = numerical_rank(s.MtFa).rank;
  const Matrix rmfa = s.R * s.MtFa;
  s.Lambda = symmetrize(rmfa.transpose() * rmfa);
  if (s.q > 0) {
    Eigen::JacobiSVD<Matrix> svd(rmfa, Eigen::ComputeThinU);
    s.U = svd.matrixU().leftCols(s.q);
  } else {
    s.U = Matrix::Zero(s.M.cols(), 0);
  }
  return s;
}

}  // namespace

DetectionSetup build_setup(const BatchStructure& batch) {
  return build_setup_impl(batch, nullptr);
}

DetectionSetup build_setup_with_basis(const BatchStructure& batch,
                                      const Matrix& M) {
  return build_setup_impl(batch, &M);
}

AggregatedBatch aggregate(const InterconnectedSystem& system,
                          const Trajectory& trajectory,
                          const std::vector<PrivacyMechanism>& mechanisms,
                          std::uint64_t privacy_seed,
                          std::size_t detector_index) {
  const int T = trajectory.horizon;
  require(detector_index < system.subsystems.size(),
          "aggregate: detector index out of range");
  const auto shared = apply_privacy(trajectory, system, mechanisms,
                                    detector_index, privacy_seed);

  AggregatedBatch agg;
  agg.T = T;
  agg.detector_index = detector_index;

  const Eigen::Index p = system.subsystems[detector_index].output_dim();
  agg.y_L.resize(T * p);
  for (int k = 1; k <= T; ++k) {
    agg.y_L.segment((k - 1) * p, p) = trajectory.outputs[detector_index][k];
  }

  Eigen::Index m_step = 0;
  for (const auto& mech : mechanisms) m_step += mech.shared_dim();
  agg.y_R.resize(T * m_step);
  for (int k = 0; k < T; ++k) {
    Eigen::Index off = 0;
    for (std::size_t m = 0; m < shared.size(); ++m) {
      agg.y_R.segment(k * m_step + off, shared[m][k].size()) = shared[m][k];
      off += shared[m][k].size();
    }
  }
  return agg;
}

Vector residual(const DetectionSetup& setup, const Vector& y_L,
                const Vector& y_R) {
  require(y_L.size() == setup.M.rows(), "residual: y_L length mismatch");
  require(y_R.size() == setup.shared_map.cols(),
          "residual: y_R length mismatch");
  return setup.M.transpose() * y_L - setup.shared_map * y_R;
}

Vector residual(const DetectionSetup& setup, const AggregatedBatch& batch) {
  return residual(setup, batch.y_L, batch.y_R);
}

TestResult glrt(const DetectionSetup& setup, const Vector& z,
                double p_false_alarm) {
  require(z.size() == setup.M.cols(), "glrt: residual length mismatch");
  require(p_false_alarm > 0.0 && p_false_alarm < 1.0,
          "glrt: false-alarm rate must lie in (0, 1)");
  if (setup.q == 0) {
    throw NoTestPossible("glrt: attack map has rank 0, no test exists");
  }
  TestResult r;
  r.p_false_alarm = p_false_alarm;
  r.statistic = (setup.U.transpose() * (setup.R * z)).squaredNorm();
  r.threshold = chi2_quantile(static_cast<int>(setup.q), p_false_alarm);
  r.attack_detected = r.statistic > r.threshold;
  return r;
}

DetectionParameters detection_parameters(const DetectionSetup& setup,
                                         const Vector& a) {
  require(a.size() == setup.MtFa.cols(),
          "detection_parameters: attack vector length mismatch");
  DetectionParameters p;
  p.q = setup.q;
  p.lambda = std::max(0.0, a.dot(setup.Lambda * a));
  return p;
}

Vector stack_attack(const Matrix& B_a, const std::vector<Vector>& values) {
  require(!values.empty(), "stack_attack: no attack values");
  const Eigen::Index n = B_a.rows();
  Vector a(static_cast<Eigen::Index>(values.size()) * n);
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(values[k].size() == B_a.cols(),
            "stack_attack: value dimension mismatch");
    a.segment(static_cast<Eigen::Index>(k) * n, n) = B_a * values[k];
  }
  return a;
}

bool undetectable(const Matrix& B_a, const Matrix& B, const Matrix& S,
                  const Matrix& C) {
  require(B_a.rows() == B.rows(), "undetectable: B_a/B row mismatch");
  require(S.rows() == 0 || S.cols() == C.rows(),
          "undetectable: S/C mismatch");
  require(C.cols() == B.cols(), "undetectable: C/B mismatch");
  const Matrix sc = S.rows() == 0 ? Matrix::Zero(0, C.cols()) : Matrix(S * C);
  const Matrix w =
      B * (Matrix::Identity(B.cols(), B.cols()) - pinv(sc) * sc);
  Matrix joint(w.rows(), w.cols() + B_a.cols());
  joint.leftCols(w.cols()) = w;
  joint.rightCols(B_a.cols()) = B_a;
  return numerical_rank(joint).rank == numerical_rank(w).rank;
}

}  // namespace privdet
