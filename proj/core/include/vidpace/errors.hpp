#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vidpace {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration; the message names the offending field.
class ConfigError : public Error {
  using Error::Error;
};

// Invalid argument to an operation.
class ArgumentError : public Error {
  using Error::Error;
};

// Malformed on-disk data; carries the byte offset of the defect.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  size_t offset() const noexcept { return offset_; }

 private:
  size_t offset_;
};

// Tensor shape mismatch; the message lists both shapes.
class ShapeError : public Error {
  using Error::Error;
};

// Operation called in the wrong state (e.g. backward before forward).
class StateError : public Error {
  using Error::Error;
};

// Checkpoint incompatible with the requested model.
class CheckpointError : public Error {
  using Error::Error;
};

// Contrastive batch with zero (anchor, positive) pairs; the loss is undefined.
class DegenerateBatchError : public Error {
  using Error::Error;
};

// Filesystem failure unrelated to data format.
class IoError : public Error {
  using Error::Error;
};

}  // namespace vidpace
