#include "pursuitlab/error.hpp"

namespace pursuitlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::InvalidOmega: return "InvalidOmega";
    case ErrorCode::ZeroSpread: return "ZeroSpread";
    case ErrorCode::UndefinedSnr: return "UndefinedSnr";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace pursuitlab
