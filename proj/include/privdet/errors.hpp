#pragma once

#include <stdexcept>
#include <string>

namespace privdet {

// Computation failed for numerical reasons (non-convergence, loss of
// definiteness, rank collapse past tolerance, ...).  Precondition
// violations on arguments throw std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The residual space of the detector is empty: every local measurement
// direction is explained by the shared data, so no test statistic exists.
class DegenerateSetup : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The attack image is invisible to the detector (q == 0); a GLRT threshold
// cannot be formed.
class NoTestPossible : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A noise-design instance violates the structural hypotheses the analytic
// solver relies on, or has no feasible covariance.
class InfeasibleDesign : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace privdet
