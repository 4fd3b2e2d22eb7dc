#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvkey {

/// One bit per element, values 0 or 1.
using BitVector = std::vector<std::uint8_t>;

inline constexpr int kBchLength = 255;
inline constexpr int kBchMaxT = 42;

/// Narrow-sense binary BCH code of length 255.
///
/// Bit i of a block is the coefficient of x^(n-1-i): the message occupies bits
/// [0, m) and the parity bits [m, n).
struct BchCodeSpec {
  int n = kBchLength;
  int m = 0;
  int t = 0;
  /// Binary generator coefficients, index = power of x; size n - m + 1.
  BitVector generator;
};

/// Builds the code with designed distance 2t + 1: the generator is the lcm of
/// the minimal polynomials of alpha^1 .. alpha^2t.
/// Throws Error(UnsupportedT) unless 1 <= t <= 42.
BchCodeSpec build_code(int t);

/// Systematic encoding: message followed by the remainder of
/// message(x) * x^(n-m) mod generator(x). Throws Error(LengthMismatch).
BitVector encode(const BchCodeSpec& code, std::span<const std::uint8_t> message);

struct DecodeResult {
  /// Empty when the decoder detected an uncorrectable pattern.
  std::optional<BitVector> message;
  int corrected = 0;

  bool ok() const { return message.has_value(); }
};

/// Bounded-distance decoding (syndromes, Berlekamp-Massey, Chien search).
/// Every pattern of at most t errors is corrected; heavier patterns are either
/// detected or miscorrected. Throws Error(LengthMismatch).
DecodeResult decode(const BchCodeSpec& code, std::span<const std::uint8_t> received);

/// Remainder of a binary polynomial modulo the generator (index = power of x).
BitVector poly_mod(std::span<const std::uint8_t> poly, std::span<const std::uint8_t> divisor);

/// Block bits as coefficients of the codeword polynomial (index = power of x).
BitVector block_to_poly(std::span<const std::uint8_t> block);

/// Number of blocks ceil(k / m) needed to carry a k-bit key.
std::size_t blocks_for_key(std::size_t key_bits, const BchCodeSpec& code);

/// Splits a key into ceil(k/m) messages; the last one is zero-padded at the tail.
std::vector<BitVector> split_key(std::span<const std::uint8_t> key, const BchCodeSpec& code);

/// Inverse of split_key: concatenates messages and drops the padding.
BitVector join_key(std::span<const BitVector> messages, std::size_t key_bits);

/// Hex string, bit 0 is the most significant bit of the first digit. The
/// last digit is zero-filled when the length is not a multiple of 4.
std::string to_hex(std::span<const std::uint8_t> bits);

}  // namespace tvkey
