#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace tvkey::detail {

// Shortest round-trippable form ("%.17g" trimmed); locale-independent for
// the values written here.
inline std::string format_double(double value) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

inline std::string format_sci(double value, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, value);
  return buf;
}

// Offsets used in file names: "200" for integral values, otherwise shortest form.
inline std::string format_offset(double mv) {
  if (mv == std::floor(mv) && std::abs(mv) < 1e15) {
    return std::to_string(static_cast<long long>(mv));
  }
  return format_double(mv);
}

}  // namespace tvkey::detail
