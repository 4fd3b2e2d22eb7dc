#include <cmath>
#include <vector>

#include "parallel.hpp"
#include "tvkey/cell_sim.hpp"
#include "tvkey/explorer.hpp"

namespace tvkey {

EmpiricalRate wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "wilson_interval needs at least one trial");
  constexpr double z = 1.959963984540054;
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {trials, successes, p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

bool attack_once(const DesignPoint& design, const AttackerParams& attacker, Rng& rng) {
  const BchCodeSpec& code = design.code;
  const double nominal = -kNominalPmosVtMv;  // PMOS threshold magnitude

  BitVector key(design.key_bits);
  for (auto& bit : key) bit = rng.bit() ? 1 : 0;
  const std::vector<BitVector> messages = split_key(key, code);

  std::vector<BitVector> recovered;
  recovered.reserve(messages.size());
  BitVector guess(static_cast<std::size_t>(code.n));
  for (const BitVector& message : messages) {
    const BitVector block = encode(code, message);
    for (std::size_t i = 0; i < block.size(); ++i) {
      // A 1 raises |Vt| of P2, a 0 raises |Vt| of P1.
      const double p1_design = nominal + (block[i] ? 0.0 : design.delta_vt_mv);
      const double p2_design = nominal + (block[i] ? design.delta_vt_mv : 0.0);
      double p1_sum = 0.0, p2_sum = 0.0;
      for (int c = 0; c < attacker.chips; ++c) {
        const double p1_true = p1_design + design.sigma_var_mv * rng.normal();
        const double p2_true = p2_design + design.sigma_var_mv * rng.normal();
        for (int r = 0; r < attacker.remeasurements; ++r) {
          p1_sum += p1_true + attacker.sigma_err_mv * rng.normal();
          p2_sum += p2_true + attacker.sigma_err_mv * rng.normal();
        }
      }
      guess[i] = p2_sum > p1_sum ? 1 : 0;
    }
    DecodeResult decoded = decode(code, guess);
    if (!decoded.ok()) return false;
    recovered.push_back(std::move(*decoded.message));
  }
  return join_key(recovered, design.key_bits) == key;
}

}  // namespace

EmpiricalRate end_to_end_attack_sim(const DesignPoint& design, const AttackerParams& attacker, std::size_t trials,
                                    const Rng& base, unsigned workers) {
  design.validate();
  attacker.validate();
  if (trials < 1000) throw Error(ErrorCode::InvalidArgument, "end-to-end attack needs at least 1000 trials");
  std::vector<std::uint8_t> outcome(trials, 0);
  detail::parallel_for(trials, workers, [&](std::size_t i) {
    Rng rng = base.stream(i);
    outcome[i] = attack_once(design, attacker, rng) ? 1 : 0;
  });
  std::size_t successes = 0;
  for (auto o : outcome) successes += o;
  return wilson_interval(successes, trials);
}

}  // namespace tvkey
