#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hahn {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or inputs (bad q, a >= b, depth < 1, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression text. `offset` is the byte offset of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Identifier that is neither a declared variable, constant nor function.
class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t offset)
      : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation outside the domain of an operation (sqrt of a negative, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::size_t offset)
      : Error(message + " (subexpression at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A function or identifier produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hahn
