#pragma once

#include <stdexcept>
#include <string>

namespace subpress {

// Malformed arguments or system descriptions. The CLI maps this to exit 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured enumeration or search budget would be exceeded. Never
// silently truncated.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A mathematical invariant failed on a concrete instance. The CLI maps this
// to exit 2.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace subpress
