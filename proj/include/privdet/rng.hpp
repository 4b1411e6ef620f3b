#pragma once

#include <cstdint>
#include <random>

#include "privdet/linalg.hpp"

namespace privdet {

// Stream kinds used to derive independent per-role seeds from one base
// seed: subsystem initial state, process noise, measurement noise, and
// privacy (shared-output) noise.
enum class StreamKind : std::uint64_t {
  kInitialState = 0,
  kProcessNoise = 1,
  kMeasurementNoise = 2,
  kPrivacyNoise = 3,
  kTrial = 4,
};

// splitmix64-mixed combination of (base, a, b); collision-resistant enough
// that per-(subsystem, kind) streams are effectively independent.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t subsystem,
                                 StreamKind kind) {
  return derive_seed(base, subsystem, static_cast<std::uint64_t>(kind));
}

// Deterministic stream of standard normal draws: mt19937_64 + Box-Muller.
// The sequence depends only on the seed, never on platform libm quirks in
// std::normal_distribution.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);

  double next();
  Vector draw(Eigen::Index n);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Symmetric PSD square root via eigendecomposition.  Eigenvalues below
// -1e-12 * (1 + max eigenvalue) throw NumericalError; small negatives are
// clamped to zero so singular covariances are usable.
Matrix psd_sqrt(const Matrix& s);

}  // namespace privdet
