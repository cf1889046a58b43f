#pragma once

#include <stdexcept>
#include <string>

namespace gclab {

// Bad arguments or malformed external input. The CLI maps this to exit code 2.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public InvalidInput {
 public:
  explicit ConfigError(const std::string& msg) : InvalidInput(msg) {}
};

// Numerical failure: divergence, non-convergence, degenerate spectra.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gclab
