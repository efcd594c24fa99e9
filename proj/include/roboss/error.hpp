#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace roboss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible domain (a <= 0, tau > 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class ShapeError : public Error {
 public:
  ShapeError(const std::string& what, std::size_t expected, std::size_t actual)
      : Error(what + " (expected " + std::to_string(expected) + ", got " +
              std::to_string(actual) + ")"),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Requested allocation exceeds the library's fixed capacity limits.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during a numeric procedure.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace roboss
