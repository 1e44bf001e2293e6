#pragma once

#include <stdexcept>
#include <string>

namespace courtesy {

/// Caller violated an operation's contract (bad flag, bad argument, wrong state).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand shapes are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A forward value became NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistic is undefined for the given data (zero variance, chance agreement of 1).
class UndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input file; the message carries the path and line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace courtesy
