#include "heatlab/error.hpp"

namespace heatlab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotReal: return "NotReal";
    case ErrorCode::Harmonic: return "Harmonic";
    case ErrorCode::DegreeTooLow: return "DegreeTooLow";
    case ErrorCode::AllMixedTermsVanish: return "AllMixedTermsVanish";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::ScheduleUnreachable: return "ScheduleUnreachable";
    case ErrorCode::TailNotNegligible: return "TailNotNegligible";
    case ErrorCode::PositiveRealPart: return "PositiveRealPart";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::CylinderOutOfRange: return "CylinderOutOfRange";
    case ErrorCode::ScheduleTooShort: return "ScheduleTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace heatlab
