#pragma once

#include <stdexcept>
#include <string>

namespace thermies {

// Error taxonomy. Everything derives from Error so callers can catch the
// library as a whole; the concrete types matter where a contract names a
// specific failure mode.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input violates a precondition (bad dimension, asymmetric matrix, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Matrix is not positive semi-definite where one is required.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

// Singular (or numerically singular) matrix where non-singular is required.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Cholesky pivot failure; carries the failing pivot index.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& msg, int pivot)
      : Error(msg), pivot_index(pivot) {}
  int pivot_index;
};

// Iterative eigen-solver did not converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Requested value not representable under the quantization model.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& msg, int i, int j)
      : Error(msg), row(i), col(j) {}
  int row;
  int col;
};

// Value outside the hardware grid range; caller should rescale.
class GridRangeError : public Error {
 public:
  using Error::Error;
};

// Enumeration / evaluation size exceeds the supported cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Target infeasible under the quantization model (PSD policy exhausted,
// variance below the grid floor, out-of-range scaling, ...).
class InfeasibilityError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (e.g. unstable integrator step).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Estimator target function returned a non-finite value on a member.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Not enough data for the requested statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// File parse / IO problems.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermies
