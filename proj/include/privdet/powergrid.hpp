#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "privdet/privacy.hpp"
#include "privdet/system_model.hpp"

namespace privdet {

// One synchronous generator of the swing-equation network
//   M_i dd(theta_i) + D_i d(theta_i) =
//       P_i - sum_k (E_i E_k / X_ik) sin(theta_i - theta_k).
struct GeneratorParams {
  double inertia = 0.0;     // M_i
  double damping = 0.0;     // D_i
  double voltage = 1.0;     // E_i (per unit)
  double angle = 0.0;       // operating-point theta_i (radians)
  double power = 0.0;       // P_i (only informational here)
};

struct GridSpec {
  std::vector<GeneratorParams> generators;
  // Line reactances X_ik; symmetric, X_ii must be +inf (no self line);
  // +inf marks absent lines.
  Matrix reactance;
  // Grouping of generator indices (0-based) into subsystems; must
  // partition 0..n-1 with contiguous ascending groups.
  std::vector<std::vector<int>> partition;
  double ts = 0.1;  // sampling period
};

// Linearization weights L_ik = -(E_i E_k / X_ik) cos(theta_i - theta_k),
// L_ii = -sum_{k != i} L_ik.
Matrix linearized_coupling(const GridSpec& grid);

// Continuous-time small-signal model in (angles, velocities) block order,
// with attack inputs on the listed generators' acceleration channels, and
// the permutation that regroups the state into per-subsystem interleaved
// (angle_g, velocity_g) pairs: x = permutation * x_blockwise.
struct ContinuousGridModel {
  Matrix A;            // 2n x 2n
  Matrix B_a;          // 2n x |attacked|
  Matrix permutation;  // 2n x 2n
};

ContinuousGridModel grid_continuous_model(const GridSpec& grid,
                                          const std::vector<int>& attacked);

// Zero-order-hold discretization: (e^{A ts}, int_0^{ts} e^{A tau} dtau B).
std::pair<Matrix, Matrix> discretize(const Matrix& A, const Matrix& B_a,
                                     double ts);

// Reads "generator bus voltage_pu angle_rad power_mw" rows ('#' comments
// allowed); inertia/damping are not in the file and are left zero.
std::vector<GeneratorParams> load_generator_table(const std::string& path);

// Ten-generator benchmark partitioned into three subsystems, plus three
// nested sharing configurations (share-all, one trimmed neighbor, both
// trimmed).  Line reactances are drawn |N(0, 0.01)| from the seed; the
// floor keeps couplings finite.
struct GridScenario {
  GridSpec grid;
  InterconnectedSystem system;
  // mechanism_sets[c] holds one mechanism per non-detector subsystem;
  // c = 0 shares every output, higher c shares less.
  std::vector<std::vector<PrivacyMechanism>> mechanism_sets;
  int horizon = 3;
  double p_false_alarm = 0.05;
  std::vector<int> attacked;  // generator indices carrying attack inputs
};

GridScenario benchmark_scenario(std::uint64_t seed,
                                const std::string& generator_table_path);

// Convenience: table shipped with the source tree.
std::string default_generator_table();

}  // namespace privdet
