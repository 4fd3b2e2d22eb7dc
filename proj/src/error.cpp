#include "tvkey/error.hpp"

#include <iostream>

namespace tvkey {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::DegenerateData: return "DEGENERATE_DATA";
    case ErrorCode::UnsupportedT: return "UNSUPPORTED_T";
    case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::DecodeFailure: return "DECODE_FAILURE";
    case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
    case ErrorCode::NoFeasibleCode: return "NO_FEASIBLE_CODE";
    case ErrorCode::DegenerateDistribution: return "DEGENERATE_DISTRIBUTION";
    case ErrorCode::CalibrationFailed: return "CALIBRATION_FAILED";
    case ErrorCode::Io: return "IO";
    case ErrorCode::Config: return "CONFIG";
  }
  return "UNKNOWN";
}

void warn(std::string_view message) { std::cerr << "tvkey: warning: " << message << '\n'; }

}  // namespace tvkey
