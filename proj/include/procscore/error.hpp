#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace procscore {

enum class ErrorKind {
  InvariantViolation,
  UnsupportedBinaryContent,
  RepositoryNotFound,
  CorruptObject,
  IoError,
  EmptyDataset,
  ParseError,
  SchemaFieldUnknown,
  EmptyTrainingSet,
  InsufficientData,
  OrderMismatch,
  InvalidDistribution,
  LengthMismatch,
  DegenerateTimeRange,
  NoEvents,
  ZeroTotalWeight,
  OutOfDomain,
  AllZeroWeights,
  InvalidSegment,
  InvalidGrid,
  ZeroMassSegment,
  MissingActivity,
  InvalidConfig,
  DegenerateSample,
  EmptySamples,
  TooFewSamples,
  TooFewInstances,
  SingularSystem,
  MissingTransform,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries one of the kinds above so that
// callers (and the CLI's exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace procscore
