#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smot {

// Input or configuration that violates a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input; carries the 1-based line number it was found on.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t line)
      : ValidationError(message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Ground truth and predictions cannot be paired up (missing or extra
// sequences, mismatched evaluation configurations).
class PairingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace smot
