#include "privdet/system_model.hpp"

#include <stdexcept>
#include <string>

#include "privdet/privacy.hpp"
#include "privdet/rng.hpp"

namespace privdet {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_psd_shape(const Matrix& s, Eigen::Index n, const char* what) {
  require(s.rows() == n && s.cols() == n,
          std::string(what) + ": wrong covariance shape");
  require((s - s.transpose()).norm() <= 1e-10 * (1.0 + s.norm()),
          std::string(what) + ": covariance not symmetric");
  // Definiteness is enforced where a factor is taken (psd_sqrt).
}

}  // namespace

Eigen::Index InterconnectedSystem::total_state_dim() const {
  Eigen::Index n = 0;
  for (const auto& s : subsystems) n += s.state_dim();
  return n;
}

Eigen::Index InterconnectedSystem::neighbor_dim(std::size_t i) const {
  return total_state_dim() - subsystems.at(i).state_dim();
}

void InterconnectedSystem::validate() const {
  require(!subsystems.empty(), "system: no subsystems");
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    const auto& s = subsystems[i];
    const Eigen::Index n = s.A.rows();
    require(n > 0 && s.A.cols() == n, "subsystem A must be square");
    require(s.B.rows() == n, "subsystem B row mismatch");
    require(s.B.cols() == neighbor_dim(i),
            "subsystem B must have one column per neighbor state");
    require(s.B_a.rows() == n || s.B_a.size() == 0,
            "subsystem B_a row mismatch");
    require(s.C.cols() == n && s.C.rows() > 0, "subsystem C shape mismatch");
    check_psd_shape(s.sigma_w, n, "sigma_w");
    check_psd_shape(s.sigma_v, s.C.rows(), "sigma_v");
    check_psd_shape(s.sigma_x0, n, "sigma_x0");
  }
}

namespace {

Trajectory simulate_impl(const InterconnectedSystem& system,
                         const AttackSignal* attack, int T,
                         std::uint64_t seed) {
  system.validate();
  require(T >= 1, "simulate: horizon must be >= 1");
  const std::size_t nsub = system.subsystems.size();
  if (attack) {
    require(attack->subsystem < nsub, "attack: subsystem index out of range");
    require(static_cast<int>(attack->values.size()) == T,
            "attack: need exactly T values");
    const auto& sub = system.subsystems[attack->subsystem];
    require(sub.attack_dim() > 0, "attack: target subsystem has no B_a");
    for (const auto& v : attack->values) {
      require(v.size() == sub.attack_dim(), "attack: value dimension mismatch");
    }
  }

  Trajectory traj;
  traj.horizon = T;
  traj.seed = seed;
  traj.states.resize(nsub);
  traj.outputs.resize(nsub);

  // Pre-draw all noise so each subsystem consumes its own streams in time
  // order regardless of the update sweep.
  std::vector<Matrix> sqrt_w(nsub), sqrt_v(nsub);
  std::vector<std::vector<Vector>> w(nsub), v(nsub);
  for (std::size_t i = 0; i < nsub; ++i) {
    const auto& sub = system.subsystems[i];
    sqrt_w[i] = psd_sqrt(sub.sigma_w);
    sqrt_v[i] = psd_sqrt(sub.sigma_v);

    GaussianStream init(derive_seed(seed, i, StreamKind::kInitialState));
    traj.states[i].reserve(T + 1);
    traj.states[i].push_back(psd_sqrt(sub.sigma_x0) *
                             init.draw(sub.state_dim()));

    GaussianStream proc(derive_seed(seed, i, StreamKind::kProcessNoise));
    w[i].reserve(T);
    for (int k = 0; k < T; ++k) w[i].push_back(sqrt_w[i] * proc.draw(sub.state_dim()));

    GaussianStream meas(derive_seed(seed, i, StreamKind::kMeasurementNoise));
    v[i].reserve(T + 1);
    for (int k = 0; k <= T; ++k) v[i].push_back(sqrt_v[i] * meas.draw(sub.output_dim()));
  }

  for (int k = 0; k < T; ++k) {
    for (std::size_t i = 0; i < nsub; ++i) {
      const auto& sub = system.subsystems[i];
      Vector neighbors(system.neighbor_dim(i));
      Eigen::Index off = 0;
      for (std::size_t j = 0; j < nsub; ++j) {
        if (j == i) continue;
        neighbors.segment(off, system.subsystems[j].state_dim()) =
            traj.states[j][k];
        off += system.subsystems[j].state_dim();
      }
      Vector next = sub.A * traj.states[i][k] + sub.B * neighbors + w[i][k];
      if (attack && attack->subsystem == i) {
        next += sub.B_a * attack->values[k];
      }
      traj.states[i].push_back(std::move(next));
    }
  }

  for (std::size_t i = 0; i < nsub; ++i) {
    const auto& sub = system.subsystems[i];
    traj.outputs[i].reserve(T + 1);
    for (int k = 0; k <= T; ++k) {
      traj.outputs[i].push_back(sub.C * traj.states[i][k] + v[i][k]);
    }
  }
  return traj;
}

}  // namespace

Trajectory simulate(const InterconnectedSystem& system, int T,
                    std::uint64_t seed) {
  return simulate_impl(system, nullptr, T, seed);
}

Trajectory simulate(const InterconnectedSystem& system,
                    const AttackSignal& attack, int T, std::uint64_t seed) {
  return simulate_impl(system, &attack, T, seed);
}

std::vector<std::vector<Vector>> apply_privacy(
    const Trajectory& trajectory, const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& mechanisms,
    std::size_t detector_index, std::uint64_t seed) {
  const std::size_t nsub = system.subsystems.size();
  require(detector_index < nsub, "apply_privacy: detector index out of range");
  require(mechanisms.size() == nsub - 1,
          "apply_privacy: need one mechanism per non-detector subsystem");
  require(trajectory.outputs.size() == nsub,
          "apply_privacy: trajectory does not match system");
  const int T = trajectory.horizon;

  std::vector<std::vector<Vector>> shared(mechanisms.size());
  std::size_t m = 0;
  for (std::size_t j = 0; j < nsub; ++j) {
    if (j == detector_index) continue;
    const auto& mech = mechanisms[m];
    mech.validate();
    require(mech.S.cols() == system.subsystems[j].output_dim(),
            "apply_privacy: mechanism S does not match subsystem output");
    const Matrix sqrt_r = psd_sqrt(mech.sigma_r);
    GaussianStream noise(derive_seed(seed, j, StreamKind::kPrivacyNoise));
    shared[m].reserve(T);
    for (int k = 0; k < T; ++k) {
      shared[m].push_back(mech.S * trajectory.outputs[j][k] +
                          sqrt_r * noise.draw(mech.shared_dim()));
    }
    ++m;
  }
  return shared;
}

}  // namespace privdet
