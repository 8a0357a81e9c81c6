#pragma once

#include <stdexcept>
#include <string>

namespace kite {

// Bad caller input: dimensions, non-positive parameters, overlapping sets.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed bank or query file. The message names the line or byte offset.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity that must be positive (quadratic form, residual variance,
// Cholesky pivot) came out non-positive beyond rounding slack.
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace kite
