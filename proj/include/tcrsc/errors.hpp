#pragma once

#include <stdexcept>
#include <string>

namespace tcrsc {

// Malformed or contract-violating input (CLI exit code 2).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-finite values, diverging iterations (CLI exit code 3).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tcrsc
