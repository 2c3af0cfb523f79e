#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ropejump {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The reduced model was evaluated with |sin(psi)| below the configured epsilon.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the domain of a formula (inconsistent rope lengths, point on the anchor line, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A state or input became NaN/Inf during integration.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, int knot) : Error(what), knot_(knot) {}
  int knot() const { return knot_; }

 private:
  int knot_;
};

/// The requested jump target cannot be reached (e.g. it lies behind the wall).
class InfeasibleTargetError : public Error {
 public:
  using Error::Error;
};

/// An optimizer failed to produce an acceptable solution.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Degenerate (flat) geometry where a full-dimensional polytope was required.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Configuration failed to parse or validate. Carries one message per offending key.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ropejump
