// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace semsurf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: non-finite coordinates, invalid grids, bad selectors.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Query outside the domain of a grid-backed field.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// A request would exceed a configured memory budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// File system failures; the message always carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A metric has no defined value for the given inputs (e.g. empty meshes).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

}  // namespace semsurf
