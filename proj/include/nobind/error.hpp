#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nobind {

enum class ErrorKind {
  NonPositiveWidth,
  RatioOutOfRange,
  TruncationTooShort,
  NonPositiveRadius,
  QuadratureFailure,
  PinningViolation,
  RatioNotAboveOne,
  NoConvergence,
  DomainViolation,
  TailViolation,
  UncertifiedTail,
  StepGridInvalid,
  GridMismatch,
  CostGuardExceeded,
  InvalidModel,
  InvalidArgument,
  ParseError,
  MissingField,
  UnknownKey,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` is the machine-readable
/// category; `index()` carries the offending region index where one exists
/// (TailViolation, PinningViolation).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace nobind
