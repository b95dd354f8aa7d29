#pragma once

#include <stdexcept>
#include <string>

namespace kinmax {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The normalization equation has no root (super-threshold boson mass).
class NoSolutionError : public Error {
 public:
  using Error::Error;
};

/// Requested (rho, E1, U) admit no positive-temperature Maxwellian.
class InfeasibleMomentsError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the inputs does not hold (e.g. mass mismatch).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Time step refused before it was taken (CFL, excessive clamping).
class StepRejectedError : public Error {
 public:
  using Error::Error;
};

/// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace kinmax
