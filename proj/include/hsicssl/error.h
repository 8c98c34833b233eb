#pragma once

#include <stdexcept>
#include <string>

namespace hsicssl {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes (validation vs runtime).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DegenerateBandwidthError : public Error {
 public:
  using Error::Error;
};

/// Raised by CSV ingestion; carries the 0-based data row (-1 when the error
/// is not tied to a row).
class IngestError : public Error {
 public:
  IngestError(const std::string& what, long row = -1) : Error(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsicssl
