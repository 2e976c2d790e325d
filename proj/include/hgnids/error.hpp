#pragma once

#include <stdexcept>
#include <string>

namespace hgnids {

/// Base of every error the library throws. The CLI maps the subclasses to
/// exit codes (usage 1, data 2, invariant 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be used: unreadable files, missing columns,
/// single-class training sets and the like.
class DataError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace hgnids
