#pragma once

#include <stdexcept>
#include <string>

namespace slat {

// Bad input: malformed files, out-of-range parameters, shape mismatches.
// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver or numeric routine left its domain (divergence, log of a
// nonpositive value, non-finite iterate). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slat
