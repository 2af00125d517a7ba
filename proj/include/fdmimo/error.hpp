#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdmimo {

enum class ErrorCode {
  NonHermitian,
  NonFinite,
  LengthMismatch,
  DimensionMismatch,
  RankDeficient,
  InvalidParameter,
  DegenerateGeometry,
  QuadratureNotConverged,
  EmptyNullSpace,
  InsufficientDimensions,
  ZeroChannel,
  NoInterferers,
  EmptyInput,
  ParseError,
  UnknownKey,
  RangeError,
  IoError,
};

/// Stable machine-readable name, used as the CLI error prefix.
constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::EmptyNullSpace: return "EmptyNullSpace";
    case ErrorCode::InsufficientDimensions: return "InsufficientDimensions";
    case ErrorCode::ZeroChannel: return "ZeroChannel";
    case ErrorCode::NoInterferers: return "NoInterferers";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fdmimo
