#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcflow {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveDeterminant,
  UnsupportedRegime,
  OriginExcluded,
  AxisExcluded,
  SeamExcluded,
  GuardViolation,
  AllRowsDegenerate,
  StepFailure,
  RowSwitched,
  DegenerateTangentImage,
  HypothesisViolated,
  DeterminantCollapse,
  NonFiniteValue,
  UnknownSuite,
  UnknownMap,
  ConfigParse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDeterminant: return "NonPositiveDeterminant";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::OriginExcluded: return "OriginExcluded";
    case ErrorCode::AxisExcluded: return "AxisExcluded";
    case ErrorCode::SeamExcluded: return "SeamExcluded";
    case ErrorCode::GuardViolation: return "GuardViolation";
    case ErrorCode::AllRowsDegenerate: return "AllRowsDegenerate";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::RowSwitched: return "RowSwitched";
    case ErrorCode::DegenerateTangentImage: return "DegenerateTangentImage";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::DeterminantCollapse: return "DeterminantCollapse";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::UnknownMap: return "UnknownMap";
    case ErrorCode::ConfigParse: return "ConfigParse";
  }
  return "Unknown";
}

/// Every checked failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qcflow
