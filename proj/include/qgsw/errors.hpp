#pragma once

#include <stdexcept>
#include <string>

namespace qgsw {

// Argument outside the mathematical domain of an operation (x <= 0, b outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Result not representable as a finite, normal double.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Precondition on the parameters not met (b >= a, Delta <= 0, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InterfaceCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BallGuardViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NearBoundary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateJacobian : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qgsw
