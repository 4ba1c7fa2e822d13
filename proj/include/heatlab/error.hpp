#pragma once

#include <stdexcept>
#include <string>

namespace heatlab {

enum class ErrorCode {
  InvalidArgument,
  NotReal,
  Harmonic,
  DegreeTooLow,
  AllMixedTermsVanish,
  GridTooCoarse,
  NotHermitian,
  NotPSD,
  SolverDiverged,
  ScheduleUnreachable,
  TailNotNegligible,
  PositiveRealPart,
  OrderTooHigh,
  CylinderOutOfRange,
  ScheduleTooShort,
  ParseError,
  ValidationError,
  Io,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace heatlab
