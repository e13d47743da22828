#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace drqcp {

/// Operand sizes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed sparse storage or problem/result file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// LDL^T hit a zero pivot or an unexpected pivot signature.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent intermediate quantities (e.g. a clearly negative
/// discriminant in the tau root).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conjugate gradient stopped at its iteration cap. Carries the best iterate
/// so callers can decide whether to use it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best, double residual)
      : std::runtime_error(what), best_iterate(std::move(best)), residual_norm(residual) {}

  std::vector<double> best_iterate;
  double residual_norm;
};

}  // namespace drqcp
