#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace affine {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation left the domain of an elementary function (log of a
/// nonpositive value, division by zero, ...) or produced a non-finite value.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A point or trajectory left the chart's validity box. For integrations,
/// `time()` is the first integrator node found outside.
class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& what, double time = 0.0)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Operands of a fibered operation do not share the required anchor.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Pointwise rank of a distribution differs from its declared rank.
class RankError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace affine
