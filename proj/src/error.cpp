#include "semimarkov/error.hpp"

namespace semimarkov {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateState: return "DuplicateState";
    case ErrorCode::TooFewStates: return "TooFewStates";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::InvalidSamplingRate: return "InvalidSamplingRate";
    case ErrorCode::BoundaryOutOfRange: return "BoundaryOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::MixedSamplingRates: return "MixedSamplingRates";
    case ErrorCode::NoTransitions: return "NoTransitions";
    case ErrorCode::SegmentTooShort: return "SegmentTooShort";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::FitDidNotConverge: return "FitDidNotConverge";
    case ErrorCode::AllFitsFailed: return "AllFitsFailed";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnsupportedPoint: return "UnsupportedPoint";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::UnreachableAbsentRow: return "UnreachableAbsentRow";
    case ErrorCode::InvalidInitialState: return "InvalidInitialState";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::NonUniformSampling: return "NonUniformSampling";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace semimarkov
