#pragma once

#include <stdexcept>
#include <string>

namespace xmloc {

// Base for every error raised by the library. Each subclass maps to one
// failure category so callers (and the CLI) can react per category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Unreadable, truncated or malformed input files.
class InputFormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Ego placed inside an occupied cell, or a pose that cannot be realized.
class InvalidPose : public Error {
 public:
  using Error::Error;
};

class DegenerateScale : public Error {
 public:
  using Error::Error;
};

// Raised by size-guarded reference routines.
class GuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace xmloc
