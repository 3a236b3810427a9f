#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsedae {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An unknown index or parameter name has no binding at evaluation time.
class UnboundSymbol : public Error {
 public:
  using Error::Error;
};

/// Evaluation produced a non-finite value (overflow, ln domain, division by zero).
class NonFinite : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidSystem : public Error {
 public:
  using Error::Error;
};

class UnsupportedSystem : public Error {
 public:
  using Error::Error;
};

/// A residual row references no unknown; the system is structurally singular.
class EmptyRow : public Error {
 public:
  explicit EmptyRow(std::size_t row)
      : Error("residual row " + std::to_string(row + 1) + " references no unknown"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(std::size_t column)
      : Error("matrix is numerically singular at column " + std::to_string(column + 1)),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class UnknownObservable : public Error {
 public:
  using Error::Error;
};

class InvalidOptions : public Error {
 public:
  using Error::Error;
};

class InitializationFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsedae
