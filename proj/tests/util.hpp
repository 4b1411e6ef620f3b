#pragma once

// Shared generators for the randomized suites: reproducible random systems,
// nested mechanism pairs, and small statistics helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "privdet/detector.hpp"
#include "privdet/errors.hpp"
#include "privdet/linalg.hpp"
#include "privdet/privacy.hpp"
#include "privdet/rng.hpp"
#include "privdet/system_model.hpp"

namespace testutil {

using privdet::Matrix;
using privdet::Vector;

inline Matrix random_matrix(privdet::GaussianStream& g, Eigen::Index r,
                            Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g.next();
  return m;
}

inline Matrix random_psd(privdet::GaussianStream& g, Eigen::Index n,
                         double ridge = 0.1) {
  const Matrix w = random_matrix(g, n, n);
  return privdet::symmetrize(w * w.transpose() / double(n)) +
         ridge * Matrix::Identity(n, n);
}

// Full row rank with probability 1; retries on the measure-zero failure.
inline Matrix random_full_row_rank(privdet::GaussianStream& g, Eigen::Index r,
                                   Eigen::Index c) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Matrix m = random_matrix(g, r, c);
    if (privdet::numerical_rank(m).rank == r) return m;
  }
  throw std::runtime_error("random_full_row_rank: kept drawing singular maps");
}

struct RandomCase {
  privdet::InterconnectedSystem system;
  std::vector<privdet::PrivacyMechanism> mechanisms;
  int T = 0;
};

// Small interconnection with identity output maps, PD covariances, partial
// noisy sharing per neighbor, and an identity attack port on the detector
// (so any state-space attack vector is realizable as an AttackSignal).
inline RandomCase make_random_case(std::uint64_t seed, int T = 2,
                                   int subsystems = 3) {
  privdet::GaussianStream g(privdet::derive_seed(seed, 0xCA5EULL, 0));
  RandomCase rc;
  rc.T = T;
  std::vector<Eigen::Index> dims;
  for (int i = 0; i < subsystems; ++i)
    dims.push_back(2 + static_cast<Eigen::Index>(
                           std::floor(std::abs(g.next()))) % 2);
  Eigen::Index total = 0;
  for (auto d : dims) total += d;
  for (int i = 0; i < subsystems; ++i) {
    const Eigen::Index n = dims[i];
    privdet::SubsystemModel s;
    s.A = random_matrix(g, n, n) * (0.4 / std::sqrt(double(n)));
    s.B = random_matrix(g, n, total - n) * 0.5;
    s.B_a = (i == 0) ? Matrix::Identity(n, n) : Matrix(n, 0);
    s.C = Matrix::Identity(n, n);
    s.sigma_w = random_psd(g, n, 0.05);
    s.sigma_v = random_psd(g, n, 0.1);
    s.sigma_x0 = random_psd(g, n, 0.2);
    rc.system.subsystems.push_back(std::move(s));
  }
  rc.system.validate();
  for (int j = 1; j < subsystems; ++j) {
    const Eigen::Index p = rc.system.subsystems[j].output_dim();
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(
                                   std::floor(std::abs(g.next()))) % p;
    privdet::PrivacyMechanism m;
    m.S = random_full_row_rank(g, k, p);
    m.sigma_r = random_psd(g, k, 0.2);
    m.validate();
    rc.mechanisms.push_back(std::move(m));
  }
  return rc;
}

// Random case whose detection setup exists and has q >= 1.
inline RandomCase make_testable_case(std::uint64_t seed, int T = 2,
                                     int subsystems = 3) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    RandomCase rc = make_random_case(
        privdet::derive_seed(seed, attempt, 0xF00DULL), T, subsystems);
    try {
      const auto setup = privdet::build_setup(
          privdet::batch_structure(rc.system, rc.mechanisms, rc.T));
      if (setup.q >= 1) return rc;
    } catch (const privdet::DegenerateSetup&) {
    }
  }
  throw std::runtime_error("make_testable_case: no usable draw in 50 tries");
}

// Strictly-more-private set derived by post-processing each mechanism:
// drop to fewer shared rows through a random map and add fresh PD noise.
inline std::vector<privdet::PrivacyMechanism> nested_mechanisms(
    const std::vector<privdet::PrivacyMechanism>& base, std::uint64_t seed) {
  privdet::GaussianStream g(privdet::derive_seed(seed, 0x2E57ULL, 1));
  std::vector<privdet::PrivacyMechanism> out;
  for (const auto& m : base) {
    const Eigen::Index k1 = m.shared_dim();
    const Eigen::Index k2 = std::max<Eigen::Index>(1, k1 - 1);
    const Matrix P = random_full_row_rank(g, k2, k1);
    out.push_back(privdet::post_process(m, P, random_psd(g, k2, 0.1)));
  }
  return out;
}

struct NestedPair {
  RandomCase base;
  std::vector<privdet::PrivacyMechanism> tighter;
};

// Random case plus a strictly-more-private derived set, redrawn until both
// configurations admit a test (q >= 1).
inline NestedPair make_nested_pair(std::uint64_t seed, int T = 2,
                                   int subsystems = 3) {
  for (int attempt = 0; attempt < 80; ++attempt) {
    const std::uint64_t s = privdet::derive_seed(seed, attempt, 0xBEEFULL);
    RandomCase rc = make_random_case(s, T, subsystems);
    std::vector<privdet::PrivacyMechanism> tighter =
        nested_mechanisms(rc.mechanisms, s);
    try {
      const auto s1 = privdet::build_setup(
          privdet::batch_structure(rc.system, rc.mechanisms, T));
      const auto s2 = privdet::build_setup(
          privdet::batch_structure(rc.system, tighter, T));
      if (s1.q >= 1 && s2.q >= 1) return {std::move(rc), std::move(tighter)};
    } catch (const privdet::DegenerateSetup&) {
    }
  }
  throw std::runtime_error("make_nested_pair: no usable draw in 80 tries");
}

// Kolmogorov-Smirnov distance of a sample against U(0, 1).
inline double ks_uniform_distance(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double lo = double(i) / n, hi = double(i + 1) / n;
    d = std::max({d, std::abs(sample[i] - lo), std::abs(sample[i] - hi)});
  }
  return d;
}

}  // namespace testutil
