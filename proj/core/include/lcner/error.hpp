#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lcner {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied data was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A file or stream could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::size_t batch_index)
      : Error(what + " (batch " + std::to_string(batch_index) + ")"),
        batch_index_(batch_index) {}
  explicit NumericalFailure(const std::string& what) : Error(what) {}

  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  std::size_t batch_index_ = 0;
};

/// Two artifacts disagree about the label vocabulary or another shared contract.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lcner
