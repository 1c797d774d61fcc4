#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semimarkov {

enum class ErrorCode {
  // sequence-core
  DuplicateState,
  TooFewStates,
  InvalidLabel,
  InvalidSamplingRate,
  BoundaryOutOfRange,
  // fitting
  EmptyInput,
  SequenceTooShort,
  MixedSamplingRates,
  NoTransitions,
  SegmentTooShort,
  InvalidArgument,
  // dwell distributions
  NonPositiveDuration,
  DegenerateData,
  TooFewObservations,
  FitDidNotConverge,
  AllFitsFailed,
  OutOfSupport,
  // comparison
  LengthMismatch,
  UnsupportedPoint,
  AlphabetMismatch,
  KindMismatch,
  // simulation
  UnreachableAbsentRow,
  InvalidInitialState,
  // io
  MalformedCsv,
  NonUniformSampling,
  UnknownState,
  RateMismatch,
  MalformedJson,
  SchemaVersionMismatch,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semimarkov
