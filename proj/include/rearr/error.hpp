#pragma once

#include <stdexcept>
#include <string>

namespace rearr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a weight or function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: unsorted endpoints, negative values, bad syntax.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A piecewise-linear function has a positive plateau where a nice function is required.
class NotNiceError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

}  // namespace rearr
