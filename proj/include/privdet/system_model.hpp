#pragma once

#include <cstdint>
#include <vector>

#include "privdet/linalg.hpp"

namespace privdet {

// One LTI subsystem of the interconnection
//   x_i(k+1) = A_i x_i(k) + B_i x_{-i}(k) + B_i^a a_i(k) + w_i(k)
//   y_i(k)   = C_i x_i(k) + v_i(k)
// where x_{-i} stacks the other subsystems' states in ascending index
// order.  B_a may have zero columns (no attack port).
struct SubsystemModel {
  Matrix A;         // n x n
  Matrix B;         // n x (total state dim of the others)
  Matrix B_a;       // n x r, r >= 0
  Matrix C;         // p x n
  Matrix sigma_w;   // n x n, PSD
  Matrix sigma_v;   // p x p, PSD
  Matrix sigma_x0;  // n x n, PSD

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index output_dim() const { return C.rows(); }
  Eigen::Index attack_dim() const { return B_a.cols(); }
};

struct InterconnectedSystem {
  std::vector<SubsystemModel> subsystems;

  Eigen::Index total_state_dim() const;
  Eigen::Index neighbor_dim(std::size_t i) const;  // sum of n_j, j != i

  // Throws std::invalid_argument on any dimension or definiteness defect.
  void validate() const;
};

// Additive attack on one subsystem: values[k] enters at step k,
// k = 0..T-1, through that subsystem's B_a.
struct AttackSignal {
  std::size_t subsystem = 0;
  std::vector<Vector> values;
};

// states[i][k], k = 0..T; outputs[i][k], k = 0..T.
struct Trajectory {
  std::vector<std::vector<Vector>> states;
  std::vector<std::vector<Vector>> outputs;
  int horizon = 0;
  std::uint64_t seed = 0;
};

// Simulates T steps.  Noise streams are derived per (subsystem, role) from
// the seed, so trajectories are reproducible and adding subsystems never
// shifts another subsystem's draws.
Trajectory simulate(const InterconnectedSystem& system, int T,
                    std::uint64_t seed);
Trajectory simulate(const InterconnectedSystem& system,
                    const AttackSignal& attack, int T, std::uint64_t seed);

// Shared stream of subsystem j under mechanism (S, sigma_r):
//   shared[m][k] = S_j y_j(k) + r_j(k),  k = 0..T-1,
// for the non-detector subsystems in ascending order (m indexes
// `mechanisms`, which must align with that order).
struct PrivacyMechanism;
std::vector<std::vector<Vector>> apply_privacy(
    const Trajectory& trajectory, const InterconnectedSystem& system,
    const std::vector<PrivacyMechanism>& mechanisms,
    std::size_t detector_index, std::uint64_t seed);

}  // namespace privdet
