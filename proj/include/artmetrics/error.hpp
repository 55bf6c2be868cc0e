#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace artmetrics {

enum class ErrorCode {
  UnsupportedFormat,
  CorruptStream,
  DecompositionFailure,
  RankOutOfRange,
  MissingColumn,
  MalformedRow,
  MissingRate,
  EmptySample,
  UnknownField,
  Underdetermined,
  NonFinite,
  SubsampleTooSmall,
  JoinMismatch,
  UnknownReportKind,
  IoFailure,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptStream: return "CorruptStream";
    case ErrorCode::DecompositionFailure: return "DecompositionFailure";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::MissingRate: return "MissingRate";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SubsampleTooSmall: return "SubsampleTooSmall";
    case ErrorCode::JoinMismatch: return "JoinMismatch";
    case ErrorCode::UnknownReportKind: return "UnknownReportKind";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// All library failures surface as this type; code() identifies the condition.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace artmetrics
