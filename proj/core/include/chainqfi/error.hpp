#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chainqfi {

enum class ErrorCode {
  // input / configuration
  AxisNotMonotone,
  ShapeMismatch,
  NonPositiveTemperature,
  InvalidArgument,
  ParseError,
  DuplicateAbscissa,
  EmptyFile,
  IncompleteGrid,
  IoError,
  ConfigError,
  // numerical
  PoleAtNonPositiveInteger,
  DomainError,
  NoInteriorMaximum,
  FitDiverged,
  SingularJacobian,
  GridTooCoarse,
  NonPositiveValue,
  WindowOutsideGrid,
  ElasticWindowMissing,
  // model-policy
  CutoffDomainError,
  BoseFactorPole,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Broad grouping used by the CLI exit-code contract.
enum class ErrorCategory { Input, Numerical, Policy };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace chainqfi
