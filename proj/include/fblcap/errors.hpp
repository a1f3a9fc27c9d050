#pragma once

#include <stdexcept>
#include <string>

namespace fblcap {

// Argument outside the mathematical domain of an operation (eps outside
// (0,1), order v <= 1, pilot fraction outside the concavity window, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative method did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite intermediate value was produced where a finite one is required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fblcap
