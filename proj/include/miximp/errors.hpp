#pragma once

#include <stdexcept>
#include <string>

namespace miximp {

// Raised when input data break a documented invariant.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numeric routine cannot produce a usable result
// (non-convergence, indefinite covariance, degenerate fits, ...).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace miximp
