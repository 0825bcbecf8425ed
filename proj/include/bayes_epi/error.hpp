#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bayes_epi {

enum class ErrorCode {
  kNotPositiveDefinite,
  kDimensionMismatch,
  kInvalidConfig,
  kFileNotFound,
  kParseError,
  kNonBinaryLabel,
  kSingularHessian,
  kSingleClass,
  kDegenerateLogits,
  kTooFewObservations,
  kNoComparablePairs,
  kNoEvents,
  kFoldWithoutEvents,
  kObjectiveFailure,
};

// Coarse grouping used to map failures onto CLI exit codes.
enum class ErrorCategory { kConfig, kData, kNumerical };

const char* to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

// Row is the 1-based data row (header excluded); column is the header name.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& detail);

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace bayes_epi
