#include "chainqfi/error.hpp"

namespace chainqfi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AxisNotMonotone: return "AxisNotMonotone";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateAbscissa: return "DuplicateAbscissa";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::PoleAtNonPositiveInteger: return "PoleAtNonPositiveInteger";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NoInteriorMaximum: return "NoInteriorMaximum";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::WindowOutsideGrid: return "WindowOutsideGrid";
    case ErrorCode::ElasticWindowMissing: return "ElasticWindowMissing";
    case ErrorCode::CutoffDomainError: return "CutoffDomainError";
    case ErrorCode::BoseFactorPole: return "BoseFactorPole";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AxisNotMonotone:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonPositiveTemperature:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateAbscissa:
    case ErrorCode::EmptyFile:
    case ErrorCode::IncompleteGrid:
    case ErrorCode::IoError:
    case ErrorCode::ConfigError:
      return ErrorCategory::Input;
    case ErrorCode::CutoffDomainError:
      return ErrorCategory::Policy;
    default:
      return ErrorCategory::Numerical;
  }
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace chainqfi
