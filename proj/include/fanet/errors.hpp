#pragma once

#include <stdexcept>
#include <string>

namespace fanet {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed box coordinates (x2 < x1, y2 < y1, negative extents).
class InvalidGeometryError : public Error {
 public:
  using Error::Error;
};

/// An operation precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data. Carries file name and 1-based line number when known.
class IngestError : public Error {
 public:
  IngestError(const std::string& file, long line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  explicit IngestError(const std::string& what) : Error(what), line_(0) {}

  const std::string& file() const noexcept { return file_; }
  long line() const noexcept { return line_; }

 private:
  std::string file_;
  long line_ = 0;
};

/// A required resource (e.g. a feature map for a frame/level) is missing.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed. Indicates a bug, not bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fanet
