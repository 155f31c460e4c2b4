#pragma once

#include <stdexcept>
#include <string>

namespace pgeod {

enum class ErrorCode {
  NotParabolic,
  NotTransverse,
  NotNormalized,
  DegenerateMetric,
  InvalidStart,
  InsufficientSamples,
  StepUnderflow,
  NotOnSurface,
  IsotropicJet,
  AssumptionViolated,
  UnknownMetric,
  BadParam,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotParabolic: return "NotParabolic";
    case ErrorCode::NotTransverse: return "NotTransverse";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NotOnSurface: return "NotOnSurface";
    case ErrorCode::IsotropicJet: return "IsotropicJet";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::BadParam: return "BadParam";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pgeod
