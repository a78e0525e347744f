#pragma once

#include <stdexcept>
#include <string>

namespace levylan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach its tolerance.
class NonConvergedQuadrature : public Error {
 public:
  NonConvergedQuadrature(const std::string& what, double achieved)
      : Error(what + " (estimated error " + std::to_string(achieved) + ")"), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// w_n(theta) outside (0, 1/3]: n too small for the asymptotic density regime.
class OutOfRegime : public Error {
 public:
  explicit OutOfRegime(double w)
      : Error("effective scale ratio w = " + std::to_string(w) + " exceeds 1/3"), w_(w) {}
  double w() const { return w_; }

 private:
  double w_;
};

class RateDegenerate : public Error {
 public:
  using Error::Error;
};

class CoefficientBoundViolated : public Error {
 public:
  using Error::Error;
};

class TemperingUnbounded : public Error {
 public:
  using Error::Error;
};

class PathExplosion : public Error {
 public:
  using Error::Error;
};

class BadScenario : public Error {
 public:
  using Error::Error;
};

}  // namespace levylan
