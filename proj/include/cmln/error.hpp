#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmln {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text input that does not follow the formula / model / target grammar.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Malformed logical objects: unknown predicates/constants, arity mismatch,
// variables where a ground formula is required.
class LogicError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration or oracle-call budget would be exceeded.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

class NotLiftableError : public Error {
 public:
  using Error::Error;
};

class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

class ImproperModelError : public Error {
 public:
  using Error::Error;
};

class UnreachableCountVectorError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmln
