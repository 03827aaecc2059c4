#pragma once

#include <stdexcept>
#include <string>

namespace rba {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (carries line/field location in the message).
struct ParseError : Error {
  using Error::Error;
};

// Duplicate names, dangling references, violated model invariants.
struct ValidationError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct IterationLimitError : Error {
  using Error::Error;
};

// Doubling search found no infeasible growth rate below the cap.
struct BracketCapError : Error {
  using Error::Error;
};

// Negativity guard, kink evaluation, degenerate averaging window.
struct NumericsError : Error {
  using Error::Error;
};

}  // namespace rba
