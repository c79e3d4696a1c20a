#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gevprice {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent inputs: mismatched lengths, broken partitions, unsupported
/// model/set combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A root or bracket could not be located in floating point.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the best iterate found.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best, double residual)
      : Error(what), best_iterate_(std::move(best)), residual_(residual) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_iterate_;
  double residual_;
};

}  // namespace gevprice
