#pragma once

#include <stdexcept>
#include <string>

namespace bohrgap {

// Input or hypothesis validation failure (CLI exit 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A certified comparison could not be decided at the working precision
// (CLI exit 3).
class PrecisionExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration, sieve or search exceeded its configured budget (CLI exit 3).
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural guard (dimension limits and the like) was violated.
class GuardViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bohrgap
