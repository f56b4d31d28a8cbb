#pragma once

#include <stdexcept>
#include <string>

namespace vibronic {

// Bad or inconsistent configuration input. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure (solver non-convergence, guard violation, ...).
// CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constructed state does not fit in the truncated Fock space.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vibronic
