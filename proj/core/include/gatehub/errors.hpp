#pragma once

#include <stdexcept>
#include <string>

namespace gatehub {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible extents, wrong rank, misaligned sequence lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Value outside an operation's mathematical domain (log of a nonpositive value).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A precondition or postcondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced while finite checks are enabled, or a diverged training run.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents or I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gatehub
