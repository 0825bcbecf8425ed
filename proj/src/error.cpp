#include "bayes_epi/error.hpp"

#include <utility>

namespace bayes_epi {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::kSingularHessian: return "SingularHessian";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kDegenerateLogits: return "DegenerateLogits";
    case ErrorCode::kTooFewObservations: return "TooFewObservations";
    case ErrorCode::kNoComparablePairs: return "NoComparablePairs";
    case ErrorCode::kNoEvents: return "NoEvents";
    case ErrorCode::kFoldWithoutEvents: return "FoldWithoutEvents";
    case ErrorCode::kObjectiveFailure: return "ObjectiveFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
      return ErrorCategory::kConfig;
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kSingularHessian:
    case ErrorCode::kDegenerateLogits:
    case ErrorCode::kObjectiveFailure:
      return ErrorCategory::kNumerical;
    default:
      return ErrorCategory::kData;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t row, std::string column, const std::string& detail)
    : Error(ErrorCode::kParseError,
            "row " + std::to_string(row) + ", column '" + column + "': " + detail),
      row_(row),
      column_(std::move(column)) {}

}  // namespace bayes_epi
