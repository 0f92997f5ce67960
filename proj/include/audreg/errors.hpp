#pragma once

#include <stdexcept>
#include <string>

namespace audreg {

/// Malformed or inconsistent input data (histories, workload files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API was driven outside its contract: role violations, stepping a
/// finished process, invalid schedules.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A primitive was applied to a cell flavor that does not support it.
class CellTypeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A word cell grew past the configured width guard.
class WidthError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Exploration or oracle refused to run because a size bound was exceeded.
class BoundExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace audreg
