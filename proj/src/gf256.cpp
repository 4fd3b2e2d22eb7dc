#include "tvkey/gf256.hpp"

#include <array>

#include "tvkey/error.hpp"

namespace tvkey {

namespace {

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<int, 256> log{};
};

constexpr Tables make_tables() {
  Tables t;
  unsigned x = 1;
  for (int i = 0; i < kGfOrder; ++i) {
    t.exp[i] = static_cast<std::uint8_t>(x);
    t.log[x] = i;
    x <<= 1;
    if (x & 0x100) x ^= kGfPrimitivePoly;
  }
  for (int i = kGfOrder; i < 512; ++i) t.exp[i] = t.exp[i - kGfOrder];
  t.log[0] = -1;
  return t;
}

constexpr Tables kTables = make_tables();

int reduce(long long e) {
  const long long r = e % kGfOrder;
  return static_cast<int>(r < 0 ? r + kGfOrder : r);
}

}  // namespace

GfElement GfElement::alpha_pow(long long e) { return GfElement(kTables.exp[reduce(e)]); }

int GfElement::log() const {
  if (is_zero()) throw Error(ErrorCode::InvalidArgument, "log of zero in GF(256)");
  return kTables.log[value_];
}

GfElement GfElement::inverse() const {
  if (is_zero()) throw Error(ErrorCode::InvalidArgument, "zero has no inverse in GF(256)");
  return GfElement(kTables.exp[(kGfOrder - kTables.log[value_]) % kGfOrder]);
}

GfElement GfElement::pow(long long e) const {
  if (is_zero()) return e == 0 ? GfElement(1) : GfElement(0);
  return alpha_pow(static_cast<long long>(kTables.log[value_]) * reduce(e));
}

GfElement operator*(GfElement a, GfElement b) {
  if (a.is_zero() || b.is_zero()) return GfElement(0);
  return GfElement(kTables.exp[kTables.log[a.value_] + kTables.log[b.value_]]);
}

GfElement operator/(GfElement a, GfElement b) { return a * b.inverse(); }

}  // namespace tvkey
