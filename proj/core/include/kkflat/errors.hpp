#pragma once

#include <stdexcept>
#include <string>

namespace kkflat {

// Bad sizes, slots, or argument combinations.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Evaluation outside a function's domain (sqrt of non-positive value,
// division by a zero-valued jet, point outside a chart box).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Pivot below threshold during factorization.
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A declared model/spec invariant failed its numerical check.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed CLI arguments or spec documents.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace kkflat
