#pragma once

#include <stdexcept>
#include <string>

namespace dyadic {

// Malformed or inconsistent input: bad ids, duplicate rows, bad weights.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numerics failed: rank deficiency, separation, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dyadic
