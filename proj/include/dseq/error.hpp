#pragma once

#include <stdexcept>
#include <string>

namespace dseq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or type invariant.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Root-finding bracket without a sign change.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or overflowing intermediate quantity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dseq
