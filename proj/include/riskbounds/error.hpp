#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskbounds {

// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model or configuration (exit status 1 in the CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An integration or quadrature could not be carried out.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double location)
      : Error(what), location_(location) {}
  explicit NumericalError(const std::string& what) : Error(what) {}
  double location() const noexcept { return location_; }

 private:
  double location_ = 0.0;
};

// A decision procedure could not reach a verdict (exit status 2 in the CLI).
class UnresolvedError : public Error {
 public:
  UnresolvedError(const std::string& what, double lambda)
      : Error(what), lambda_(lambda) {}
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

// The candidate set at the requested eigen-parameter is empty.
class EmptyCandidateSet : public Error {
 public:
  EmptyCandidateSet(const std::string& what, double lambda)
      : Error(what), lambda_(lambda) {}
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

}  // namespace riskbounds
