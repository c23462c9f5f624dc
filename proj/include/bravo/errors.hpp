#pragma once

#include <stdexcept>
#include <string>

namespace bravo {

// One kind per failure mode named in the module contracts. Tests match on the
// kind, not on message text.
enum class ErrorKind {
  DimensionMismatch,
  OutOfRangeLabel,
  OutOfRangeScore,
  ShapeMismatch,
  NonFiniteData,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  BadBitDepth,
  BadChannelCount,
  SchemaViolation,
  DuplicateId,
  EmptyAccumulator,
  DegenerateCurve,
  ConfigMismatch,
  InvalidArgument,
  IoFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace bravo
