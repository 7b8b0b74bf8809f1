#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drowsy {

// Bad input data: malformed files, unusable datasets, impossible ROIs.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed byte stream or text. position() is a byte offset or a 1-based
// line number depending on the format; the message says which.
class ParseError : public DataError {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : DataError(msg), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_ = 0;
};

// Tensor or layer dimension mismatch.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf escaped a numeric computation.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse, e.g. backward() without a matching forward().
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace drowsy
