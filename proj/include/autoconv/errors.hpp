#pragma once

#include <stdexcept>
#include <string>

namespace autoconv {

// Base for all library errors so callers can catch one type.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid numeric input: negative coefficient, non-positive n or m,
// non-normalized profile where normalization is required, and similar.
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Container of the wrong length for the stated n.
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Window outside the valid index range for the given n.
struct RangeError : Error {
  explicit RangeError(const std::string& msg) : Error(msg) {}
};

// Normalization of an all-zero vector or other mass-zero degeneracy.
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent enumeration cursor.
struct CursorError : Error {
  explicit CursorError(const std::string& msg) : Error(msg) {}
};

// Checkpoint file that is malformed or does not match the requested run.
struct CheckpointError : Error {
  explicit CheckpointError(const std::string& msg) : Error(msg) {}
};

// Exact integer arithmetic would leave the representable range.
struct OverflowError : Error {
  explicit OverflowError(const std::string& msg) : Error(msg) {}
};

inline void check_n(int n) {
  if (n < 1) throw DomainError("n must be >= 1, got " + std::to_string(n));
}

}  // namespace autoconv
