#pragma once

#include <cstdint>

namespace tvkey {

/// Primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 generating GF(2^8). It fixes
/// the codeword bit patterns of every BCH code built here.
inline constexpr unsigned kGfPrimitivePoly = 0x11D;
inline constexpr int kGfOrder = 255;

/// Element of GF(2^8). Addition is XOR; multiplication goes through log tables.
class GfElement {
 public:
  constexpr GfElement() = default;
  constexpr explicit GfElement(std::uint8_t value) : value_(value) {}

  constexpr std::uint8_t value() const { return value_; }
  constexpr bool is_zero() const { return value_ == 0; }

  /// alpha^e for any integer e (reduced mod 255).
  static GfElement alpha_pow(long long e);

  /// Discrete log base alpha, in [0, 254]. Throws on zero.
  int log() const;
  /// Throws Error(InvalidArgument) on zero.
  GfElement inverse() const;
  GfElement pow(long long e) const;

  friend constexpr GfElement operator+(GfElement a, GfElement b) {
    return GfElement(static_cast<std::uint8_t>(a.value_ ^ b.value_));
  }
  friend constexpr GfElement operator-(GfElement a, GfElement b) { return a + b; }
  friend GfElement operator*(GfElement a, GfElement b);
  friend GfElement operator/(GfElement a, GfElement b);
  GfElement& operator+=(GfElement other) { return *this = *this + other; }
  GfElement& operator*=(GfElement other) { return *this = *this * other; }
  friend constexpr bool operator==(GfElement, GfElement) = default;

 private:
  std::uint8_t value_ = 0;
};

}  // namespace tvkey
