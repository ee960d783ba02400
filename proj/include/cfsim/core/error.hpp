#pragma once

#include <stdexcept>
#include <string>

namespace cfsim {

/// Base class for every error raised by the harness.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model or simulator text that does not contain the expected marker.
class ParseFailure : public Error {
 public:
  using Error::Error;
};

/// A caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfsim
