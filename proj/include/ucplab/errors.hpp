#pragma once

#include <stdexcept>
#include <string>

namespace ucplab {

// Bad input: malformed configuration, violated preconditions, shape mismatch.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine could not deliver the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ucplab
