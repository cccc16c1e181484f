#pragma once

#include <stdexcept>
#include <string>

namespace avr {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: bad files, bad flags, invariant violations in caller data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Something failed while running (browser, transport, encoder).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

/// A long-running job stopped early but its run directory can be resumed.
class PartialFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace avr
