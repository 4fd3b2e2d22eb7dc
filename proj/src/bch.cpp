#include "tvkey/bch.hpp"

#include <algorithm>
#include <bitset>
#include <string>

#include "tvkey/error.hpp"
#include "tvkey/gf256.hpp"

namespace tvkey {

namespace {

using Register = std::bitset<256>;

// Binary polynomial product (index = power of x).
BitVector multiply_binary(const BitVector& a, const BitVector& b) {
  BitVector out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
  }
  return out;
}

// Minimal polynomial over GF(2) of the elements alpha^j, j in `coset`.
BitVector minimal_polynomial(const std::vector<int>& coset) {
  std::vector<GfElement> poly{GfElement(1)};
  for (int j : coset) {
    const GfElement root = GfElement::alpha_pow(j);
    std::vector<GfElement> next(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] += poly[i] * root;
    }
    poly = std::move(next);
  }
  BitVector binary(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (poly[i].value() > 1) {
      throw Error(ErrorCode::InvalidArgument, "minimal polynomial has a non-binary coefficient");
    }
    binary[i] = poly[i].value();
  }
  return binary;
}

}  // namespace

BchCodeSpec build_code(int t) {
  if (t < 1 || t > kBchMaxT) {
    throw Error(ErrorCode::UnsupportedT, "t = " + std::to_string(t) + " is outside the supported range 1.." +
                                             std::to_string(kBchMaxT) + " for length 255");
  }
  std::vector<bool> covered(kGfOrder, false);
  BitVector generator{1};
  for (int i = 1; i <= 2 * t; ++i) {
    if (covered[i]) continue;
    std::vector<int> coset;
    for (int j = i; !covered[j]; j = (2 * j) % kGfOrder) {
      covered[j] = true;
      coset.push_back(j);
    }
    generator = multiply_binary(generator, minimal_polynomial(coset));
  }
  const int degree = static_cast<int>(generator.size()) - 1;
  if (degree >= kBchLength) {
    throw Error(ErrorCode::UnsupportedT, "no BCH code of length 255 corrects " + std::to_string(t) + " errors");
  }
  return {kBchLength, kBchLength - degree, t, std::move(generator)};
}

BitVector encode(const BchCodeSpec& code, std::span<const std::uint8_t> message) {
  if (message.size() != static_cast<std::size_t>(code.m)) {
    throw Error(ErrorCode::LengthMismatch, "message has " + std::to_string(message.size()) + " bits, code expects " +
                                               std::to_string(code.m));
  }
  const int parity = code.n - code.m;
  Register generator_low;
  for (int i = 0; i < parity; ++i) generator_low[i] = code.generator[i] != 0;

  // LFSR division: message bits enter highest power first.
  Register reg;
  for (int i = 0; i < code.m; ++i) {
    const bool feedback = (message[i] != 0) != reg[parity - 1];
    reg <<= 1;
    reg[parity] = false;
    if (feedback) reg ^= generator_low;
  }
  BitVector block(code.n);
  std::copy(message.begin(), message.end(), block.begin());
  for (int j = 0; j < parity; ++j) {
    // Bit m + j holds the coefficient of x^(parity - 1 - j).
    block[code.m + j] = reg[parity - 1 - j] ? 1 : 0;
  }
  return block;
}

DecodeResult decode(const BchCodeSpec& code, std::span<const std::uint8_t> received) {
  if (received.size() != static_cast<std::size_t>(code.n)) {
    throw Error(ErrorCode::LengthMismatch, "block has " + std::to_string(received.size()) + " bits, code expects " +
                                               std::to_string(code.n));
  }
  const int n = code.n;
  const int t = code.t;

  // S_j = r(alpha^j) for j = 1..2t; even syndromes follow from S_2j = S_j^2.
  std::vector<GfElement> syndromes(2 * t + 1);
  std::vector<int> powers;
  for (int i = 0; i < n; ++i) {
    if (received[i]) powers.push_back(n - 1 - i);
  }
  bool all_zero = true;
  for (int j = 1; j <= 2 * t; ++j) {
    GfElement s;
    if (j % 2 == 0) {
      s = syndromes[j / 2] * syndromes[j / 2];
    } else {
      for (int p : powers) s += GfElement::alpha_pow(static_cast<long long>(j) * p);
    }
    syndromes[j] = s;
    all_zero = all_zero && s.is_zero();
  }

  BitVector word(received.begin(), received.end());
  if (all_zero) {
    return {BitVector(word.begin(), word.begin() + code.m), 0};
  }

  // Berlekamp-Massey for the error locator Lambda(x).
  std::vector<GfElement> lambda(2 * t + 2), prev(2 * t + 2);
  lambda[0] = GfElement(1);
  prev[0] = GfElement(1);
  int degree = 0;
  int shift = 1;
  GfElement prev_discrepancy(1);
  for (int r = 1; r <= 2 * t; ++r) {
    GfElement discrepancy = syndromes[r];
    for (int i = 1; i <= degree; ++i) discrepancy += lambda[i] * syndromes[r - i];
    if (discrepancy.is_zero()) {
      ++shift;
      continue;
    }
    const GfElement scale = discrepancy / prev_discrepancy;
    if (2 * degree <= r - 1) {
      std::vector<GfElement> saved = lambda;
      for (std::size_t i = 0; i + shift < lambda.size(); ++i) lambda[i + shift] += scale * prev[i];
      degree = r - degree;
      prev = std::move(saved);
      prev_discrepancy = discrepancy;
      shift = 1;
    } else {
      for (std::size_t i = 0; i + shift < lambda.size(); ++i) lambda[i + shift] += scale * prev[i];
      ++shift;
    }
  }
  if (degree > t) return {std::nullopt, 0};

  // Chien search: error at power e iff Lambda(alpha^-e) == 0.
  std::vector<GfElement> terms(lambda.begin(), lambda.begin() + degree + 1);
  std::vector<GfElement> steps(degree + 1);
  for (int k = 0; k <= degree; ++k) steps[k] = GfElement::alpha_pow(-k);
  int found = 0;
  for (int e = 0; e < n; ++e) {
    GfElement sum;
    for (int k = 0; k <= degree; ++k) sum += terms[k];
    if (sum.is_zero()) {
      word[n - 1 - e] ^= 1;
      ++found;
    }
    for (int k = 1; k <= degree; ++k) terms[k] *= steps[k];
  }
  if (found != degree) return {std::nullopt, 0};
  return {BitVector(word.begin(), word.begin() + code.m), found};
}

BitVector poly_mod(std::span<const std::uint8_t> poly, std::span<const std::uint8_t> divisor) {
  int divisor_degree = static_cast<int>(divisor.size()) - 1;
  while (divisor_degree >= 0 && !divisor[divisor_degree]) --divisor_degree;
  if (divisor_degree < 0) throw Error(ErrorCode::InvalidArgument, "division by the zero polynomial");
  BitVector rem(poly.begin(), poly.end());
  for (int i = static_cast<int>(rem.size()) - 1; i >= divisor_degree; --i) {
    if (!rem[i]) continue;
    for (int j = 0; j <= divisor_degree; ++j) rem[i - divisor_degree + j] ^= divisor[j];
  }
  rem.resize(static_cast<std::size_t>(divisor_degree));
  return rem;
}

BitVector block_to_poly(std::span<const std::uint8_t> block) {
  return BitVector(block.rbegin(), block.rend());
}

std::size_t blocks_for_key(std::size_t key_bits, const BchCodeSpec& code) {
  if (code.m <= 0) throw Error(ErrorCode::InvalidArgument, "code has no message bits");
  const auto m = static_cast<std::size_t>(code.m);
  return (key_bits + m - 1) / m;
}

std::vector<BitVector> split_key(std::span<const std::uint8_t> key, const BchCodeSpec& code) {
  const std::size_t blocks = blocks_for_key(key.size(), code);
  const auto m = static_cast<std::size_t>(code.m);
  std::vector<BitVector> messages(blocks, BitVector(m, 0));
  for (std::size_t i = 0; i < key.size(); ++i) messages[i / m][i % m] = key[i];
  return messages;
}

BitVector join_key(std::span<const BitVector> messages, std::size_t key_bits) {
  BitVector key;
  key.reserve(key_bits);
  for (const BitVector& message : messages) {
    for (std::uint8_t bit : message) {
      if (key.size() == key_bits) return key;
      key.push_back(bit);
    }
  }
  if (key.size() != key_bits) throw Error(ErrorCode::LengthMismatch, "messages carry fewer bits than the key");
  return key;
}

std::string to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      nibble <<= 1;
      if (i + j < bits.size() && bits[i + j]) nibble |= 1;
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

}  // namespace tvkey
