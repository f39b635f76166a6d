#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace petzlab {

enum class ErrorKind {
  NotHermitian,
  NonFinite,
  NotPsd,
  DimensionMismatch,
  InvalidOrder,
  NotState,
  NotTracePreserving,
  TooManyKraus,
  InvalidParameter,
  SupportViolation,
  NegativeEpsilon,
  DegenerateChannelOutput,
  ToleranceNotMet,
  AlignmentFailure,
  MaxIterations,
  NumericalBreakdown,
  BracketViolated,
  ParseError,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotPsd: return "NotPsd";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::NotState: return "NotState";
    case ErrorKind::NotTracePreserving: return "NotTracePreserving";
    case ErrorKind::TooManyKraus: return "TooManyKraus";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::NegativeEpsilon: return "NegativeEpsilon";
    case ErrorKind::DegenerateChannelOutput: return "DegenerateChannelOutput";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::AlignmentFailure: return "AlignmentFailure";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::BracketViolated: return "BracketViolated";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace petzlab
