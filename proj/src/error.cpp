#include "nobind/error.hpp"

namespace nobind {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveWidth: return "NonPositiveWidth";
    case ErrorKind::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorKind::TruncationTooShort: return "TruncationTooShort";
    case ErrorKind::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::PinningViolation: return "PinningViolation";
    case ErrorKind::RatioNotAboveOne: return "RatioNotAboveOne";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::TailViolation: return "TailViolation";
    case ErrorKind::UncertifiedTail: return "UncertifiedTail";
    case ErrorKind::StepGridInvalid: return "StepGridInvalid";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::CostGuardExceeded: return "CostGuardExceeded";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind),
      index_(index) {}

}  // namespace nobind
