#pragma once

#include <stdexcept>
#include <string>

namespace flopsd {

// Training diverged or an operation produced non-finite values.
// The CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed config, missing checkpoint, seed collisions.
// The CLI maps this (and std::invalid_argument) to exit code 1.
class UsageError : public std::runtime_error {
  public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace flopsd
