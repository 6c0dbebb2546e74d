#pragma once

#include <stdexcept>
#include <string>

namespace fermsim {

/// Raised by the model parser and validator. Carries the 1-based line number
/// of the offending directive, or 0 when the problem concerns the whole file.
class ModelError : public std::runtime_error {
 public:
  ModelError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A numerical invariant (trace, positivity, subspace confinement, steady-state
/// uniqueness) was violated beyond its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fermsim
