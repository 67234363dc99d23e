#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fla {

enum class ErrorCode {
  // cellspace
  InvalidCell,
  SlotConflict,
  NotADag,
  InvalidStructure,
  LengthMismatch,
  BadGenotype,
  // sampling
  Exhausted,
  EvalMiss,
  DeadEnd,
  // fitness
  ParseError,
  DuplicateKey,
  Degenerate,
  // metrics
  Empty,
  ZeroVariance,
  TooShort,
  WindowTooLarge,
  SpaceTooLarge,
  // distfit
  TooFewSamples,
  NoConvergedFit,
  // persistence
  EmptyPopulation,
  // footprint
  SourceMismatch,
  BudgetMismatch,
  TooFew,
  AllFlagged,
  // plumbing
  InvalidArgument,
  SchemaError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidCell: return "INVALID_CELL";
    case ErrorCode::SlotConflict: return "SLOT_CONFLICT";
    case ErrorCode::NotADag: return "NOT_A_DAG";
    case ErrorCode::InvalidStructure: return "INVALID_STRUCTURE";
    case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::BadGenotype: return "BAD_GENOTYPE";
    case ErrorCode::Exhausted: return "EXHAUSTED";
    case ErrorCode::EvalMiss: return "EVAL_MISS";
    case ErrorCode::DeadEnd: return "DEAD_END";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::DuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::Empty: return "EMPTY";
    case ErrorCode::ZeroVariance: return "ZERO_VARIANCE";
    case ErrorCode::TooShort: return "TOO_SHORT";
    case ErrorCode::WindowTooLarge: return "WINDOW_TOO_LARGE";
    case ErrorCode::SpaceTooLarge: return "SPACE_TOO_LARGE";
    case ErrorCode::TooFewSamples: return "TOO_FEW_SAMPLES";
    case ErrorCode::NoConvergedFit: return "NO_CONVERGED_FIT";
    case ErrorCode::EmptyPopulation: return "EMPTY_POPULATION";
    case ErrorCode::SourceMismatch: return "SOURCE_MISMATCH";
    case ErrorCode::BudgetMismatch: return "BUDGET_MISMATCH";
    case ErrorCode::TooFew: return "TOO_FEW";
    case ErrorCode::AllFlagged: return "ALL_FLAGGED";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

/// Every failure in the library is reported as an Error carrying a
/// machine-readable code; what() is "<CODE>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fla
