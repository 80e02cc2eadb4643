#pragma once

#include <stdexcept>
#include <string>

namespace proxfwi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable file contents.
class FormatError : public Error {
  public:
    using Error::Error;
};

/// Shapes, indices or inclusion layouts that do not fit the grid.
class GeometryError : public Error {
  public:
    using Error::Error;
};

/// Argument outside its admissible range.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Singular pivots, divergence, non-finite iterates.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Operation invoked on an object in the wrong state (e.g. stale cache).
class StateError : public Error {
  public:
    using Error::Error;
};

} // namespace proxfwi
