#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace skorokhod {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A raw reflection matrix has a non-positive diagonal entry.
class NormalizationError : public Error {
 public:
  NormalizationError(const std::string& what, Index index)
      : Error(what), index(index) {}
  Index index;
};

/// Eigen-iteration failed to converge within its budget.
class SpectralConvergenceError : public Error {
 public:
  SpectralConvergenceError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

/// Input dimension outside the supported range, or mismatched sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The feasibility LP for a principal submatrix could not be decided.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Paths expected on a common breakpoint grid do not share one.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration exhausted its budget before reaching tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, std::int64_t iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  double residual;
  std::int64_t iterations;
};

/// Problem lies outside the regime the solver supports.
class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace skorokhod
