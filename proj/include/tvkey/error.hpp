#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvkey {

enum class ErrorCode {
  InvalidArgument = 1,
  DegenerateData,
  UnsupportedT,
  LengthMismatch,
  DecodeFailure,
  InsufficientSamples,
  NoFeasibleCode,
  DegenerateDistribution,
  CalibrationFailed,
  Io,
  Config,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Writes a single warning line to stderr.
void warn(std::string_view message);

}  // namespace tvkey
