#pragma once

#include <stdexcept>
#include <string>

namespace ddpn {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Wrong family / flag combination requested by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Tensor or list sizes that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A series or log-space computation left the representable range.
class NumericOverflow : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class NumericDivergence : public Error {
 public:
  using Error::Error;
};

// File missing, unreadable, or malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddpn
