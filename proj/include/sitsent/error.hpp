#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sitsent {

// Base of every data error raised by the library. The CLI maps these to
// exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Wrong arity or bad token inside an otherwise readable file.
class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Duplicate identifiers, undeclared annotators and similar.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A record points at something that does not exist.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class LayoutError : public Error {
 public:
  using Error::Error;
};

// Single-class or empty training data.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sitsent
