#pragma once

#include <stdexcept>
#include <string>

namespace dtn {

// Argument outside the mathematical domain of an operation (x <= 0 for Gamma, z <= 0 for Y, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested operation is not supported for these parameters (e.g. d != 2 in a d = 2 only path).
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Energy too close to a Dirichlet eigenvalue of the mode being solved.
class NearEigenvalueError : public std::runtime_error {
 public:
  NearEigenvalueError(const std::string& what, double log2_margin)
      : std::runtime_error(what), log2_margin_(log2_margin) {}
  /// log2 of |J_alpha(k)| divided by the guard threshold; negative means rejected.
  double log2_margin() const noexcept { return log2_margin_; }

 private:
  double log2_margin_;
};

// An iterative evaluation did not reach the requested accuracy within its precision budget.
class PrecisionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-formed user input: config file, command-line parameters, range syntax.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dtn
