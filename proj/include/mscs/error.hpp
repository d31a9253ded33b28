#pragma once

#include <stdexcept>
#include <string>

namespace mscs {

/// Caller supplied a value outside an operation's domain. The CLI maps this
/// to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bitstream could not be decoded (truncated payload, bad header, model
/// mismatch).
class CorruptStream : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance solve broke down even after jitter.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mscs
