#pragma once

#include <stdexcept>
#include <string>

namespace sublin {

enum class ErrorCode {
  NonPositiveDiagonal,
  DimensionMismatch,
  NotRDD,
  NotRDDZ,
  NotCDD,
  NotRCDD,
  NotSDD,
  NotDominant,
  NotEulerian,
  NotUndirected,
  Disconnected,
  SameEndpoints,
  ZeroOutDegree,
  ZeroT,
  NegativeInput,
  InvalidGamma,
  InvalidEpsilon,
  TooLargeForDense,
  NoConvergenceWithinBudget,
  BudgetExhausted,
  HypothesisViolated,
  MissingEta,
  IndexOutOfRange,
  OracleInconsistent,
  ParseError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveDiagonal: return "NonPositiveDiagonal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotRDD: return "NotRDD";
    case ErrorCode::NotRDDZ: return "NotRDDZ";
    case ErrorCode::NotCDD: return "NotCDD";
    case ErrorCode::NotRCDD: return "NotRCDD";
    case ErrorCode::NotSDD: return "NotSDD";
    case ErrorCode::NotDominant: return "NotDominant";
    case ErrorCode::NotEulerian: return "NotEulerian";
    case ErrorCode::NotUndirected: return "NotUndirected";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::SameEndpoints: return "SameEndpoints";
    case ErrorCode::ZeroOutDegree: return "ZeroOutDegree";
    case ErrorCode::ZeroT: return "ZeroT";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::TooLargeForDense: return "TooLargeForDense";
    case ErrorCode::NoConvergenceWithinBudget: return "NoConvergenceWithinBudget";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::MissingEta: return "MissingEta";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::OracleInconsistent: return "OracleInconsistent";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sublin
