#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lcc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The point lies at or behind the camera plane and has no image.
class BehindCamera : public Error {
 public:
  BehindCamera() : Error("point is behind the camera") {}
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class EmptyLedger : public EmptyInput {
 public:
  using EmptyInput::EmptyInput;
};

class DuplicateAnnotation : public Error {
 public:
  using Error::Error;
};

class SkewExceeded : public Error {
 public:
  using Error::Error;
};

class TooFew : public Error {
 public:
  using Error::Error;
};

class TooFewCorrespondences : public Error {
 public:
  using Error::Error;
};

class ModelMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A record in a text file could not be parsed. `line()` is 1-based.
class FormatError : public Error {
 public:
  FormatError(const std::string& source, std::size_t line,
              const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A point-cloud row that does not parse.
class MalformedRow : public FormatError {
 public:
  using FormatError::FormatError;
};

class MissingColumn : public Error {
 public:
  using Error::Error;
};

}  // namespace lcc
