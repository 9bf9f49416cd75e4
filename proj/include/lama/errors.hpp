#pragma once

#include <stdexcept>
#include <string>

namespace lama {

/// Bad user input: unknown names, inconsistent dimensions, invalid config.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: quadrature did not converge, detector diverged.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lama
