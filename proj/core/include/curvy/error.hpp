#pragma once

#include <stdexcept>
#include <string>

namespace curvy {

// Exception hierarchy. The CLI maps each family to an exit code:
// UsageError -> 1, DataError/GeometryError -> 2, DivergenceError -> 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing input files, schema violations, shape mismatches.
class DataError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A training loss or gradient became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace curvy
