#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fluxspec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Domain data cannot be realized (hole exceeds outer boundary, no admissible radius, ...).
class GeometryInfeasible : public Error {
public:
  using Error::Error;
};

class MeshError : public Error {
public:
  using Error::Error;
};

/// Assembled forms violate Hermiticity or positivity of the mass form.
class AssemblyIntegrityError : public Error {
public:
  using Error::Error;
};

class OracleFailure : public Error {
public:
  using Error::Error;
};

/// Eigen-iteration hit its cap; carries the residual history.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }
  double last_residual() const noexcept { return residuals_.empty() ? 0.0 : residuals_.back(); }

private:
  std::vector<double> residuals_;
};

}  // namespace fluxspec
