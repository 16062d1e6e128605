#pragma once

#include <stdexcept>
#include <string>

namespace dualgap {

// Bad user input: shapes, ranges, unknown names. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation does not hold.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class UnsupportedGeneratorError : public InputError {
 public:
  using InputError::InputError;
};

// Iterative solver stopped before reaching its tolerance. Maps to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_error)
      : std::runtime_error(what), last_error_(last_error) {}
  double last_error() const { return last_error_; }

 private:
  double last_error_;
};

}  // namespace dualgap
