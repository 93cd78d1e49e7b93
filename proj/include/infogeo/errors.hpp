#pragma once

#include <stdexcept>
#include <string>

namespace infogeo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be symmetric positive definite is not.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// An eigen-decomposition or factorization failed to converge.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling ran out of attempts (over-constrained environment).
class SamplingBudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Input file or configuration failed schema/semantic validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The planner produced no goal-reaching node within its budget.
class PlanningFailure : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace infogeo
