#pragma once

#include <stdexcept>
#include <string>

namespace lightpos {

/// Violated precondition or malformed input (bad argument, schema violation).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a result for well-formed input
/// (rank deficiency, domain violation, non-monotone fit).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lightpos
