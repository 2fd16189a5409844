#pragma once

#include <stdexcept>
#include <string>

namespace anoonly {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Train-mode batch statistics need at least two rows.
class BatchTooSmallError : public Error {
 public:
  using Error::Error;
};

// Backward called without a matching forward.
class StateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Ranking metric requested on a set missing one of the classes.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace anoonly
