#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sscl {

enum class ErrorCode {
  InvalidShape,
  InvalidLabel,
  DegenerateVector,
  NonFiniteGradient,
  InvalidPair,
  InvalidBatch,
  InsufficientData,
  SchemaMismatch,
  ParseError,
  EmptyDataset,
  MissingLabel,
  UnknownClass,
  EmptyEvaluation,
  NoSharedFeatures,
  Io,
  Config,
  Checkpoint,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a category so the CLI can map
// it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by load_csv when a row cannot be parsed; row is 1-based over data rows.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace sscl
