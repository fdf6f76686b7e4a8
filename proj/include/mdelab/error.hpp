#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdelab {

enum class ErrorCode {
  EmptyInput,
  NegativeWeight,
  DimMismatch,
  InvalidArgument,
  LpFailure,
  Infeasible,
  IterationCap,
  BaseOffGrid,
  SupportBlowup,
  OutOfRange,
  EndpointMismatch,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library surfaces as this exception; `code()` tells
/// callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LpFailure: return "LpFailure";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::BaseOffGrid: return "BaseOffGrid";
    case ErrorCode::SupportBlowup: return "SupportBlowup";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EndpointMismatch: return "EndpointMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mdelab
