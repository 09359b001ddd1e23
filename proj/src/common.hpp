#pragma once

#include <stdexcept>
#include <string>

namespace frauddet {

// Library-wide error with a coarse kind so callers (C API, CLI) can map
// failures onto error codes without parsing messages.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    InvalidArgument,  // caller misuse: bad parameter, arity mismatch, ...
    Validation,       // data content violates an invariant
    Io,               // file system / stream failure
    Internal,
  };

  Error(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

[[noreturn]] void throw_invalid(std::string message);
[[noreturn]] void throw_validation(std::string message);
[[noreturn]] void throw_io(std::string message);
[[noreturn]] void throw_internal(std::string message);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Fixed-point with `digits` decimals, for human-facing tables.
std::string format_fixed(double value, int digits);

}  // namespace frauddet
