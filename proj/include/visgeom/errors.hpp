#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace visgeom {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input shapes (image sizes, list lengths) do not match.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// A robust or closed-form fit has no unique solution (too few samples,
// zero variance, collinear points, ...).
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// Ray map does not constrain a full camera (collinear pixels, degenerate
// directions, rank-deficient DLT system).
class DegenerateRays : public Error {
 public:
  using Error::Error;
};

// Requested TSDF volume exceeds the voxel budget.
class VolumeTooLarge : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file. `offset` is the byte position of the first
// missing or unexpected byte.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, std::string found)
      : Error("parse error at byte " + std::to_string(offset) + ": expected " +
              expected + ", found " + found),
        offset(offset),
        expected(std::move(expected)),
        found(std::move(found)) {}

  std::size_t offset;
  std::string expected;
  std::string found;
};

}  // namespace visgeom
