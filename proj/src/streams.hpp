#pragma once

#include <bit>
#include <cstdint>

#include "tvkey/random.hpp"

namespace tvkey::detail {

// Top-level stream families derived from the flow seed. Streams are keyed by
// the offset value, not its position, so adding an offset leaves the others'
// results unchanged.
enum class StreamFamily : std::uint64_t {
  Population = 1,
  Chips = 2,
  Attack = 3,
};

inline Rng offset_stream(std::uint64_t seed, StreamFamily family, double offset_mv) {
  return Rng(seed).stream(static_cast<std::uint64_t>(family)).stream(std::bit_cast<std::uint64_t>(offset_mv));
}

}  // namespace tvkey::detail
