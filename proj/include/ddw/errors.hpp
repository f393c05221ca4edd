#pragma once

#include <stdexcept>
#include <string>

namespace ddw {

/// Argument outside the mathematical domain of an operation (r <= 0, s < 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An internal invariant failed; indicates a bug rather than bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A constant-selection recipe could not produce admissible parameters.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature, root finding or time stepping failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inadmissible configuration (missing fields, violated standing assumptions).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The numerical support reached the outer boundary of the radial grid.
class GridTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddw
