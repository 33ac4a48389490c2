#pragma once

#include <stdexcept>
#include <string>

namespace crossover {

/// Malformed input: bad probabilities, wrong dimensions, unparsable files.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation refused to run because it would exceed a configured budget
/// (sequence enumeration, exact realization enumeration).
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crossover
