#pragma once

#include <stdexcept>
#include <string>

namespace ldaselect {

// Input, configuration, or dimension mismatch rejected before computing.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric routine could not produce a trustworthy result
// (non-convergence, precision exhaustion, degenerate mass).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ldaselect
