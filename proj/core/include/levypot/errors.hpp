#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace levypot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModelError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class UnstableRatioError : public Error {
 public:
  using Error::Error;
};

class DegenerateExperimentError : public Error {
 public:
  using Error::Error;
};

class SearchFailure : public Error {
 public:
  using Error::Error;
};

// Parse failure with a byte offset into the offending text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at offset " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace levypot
