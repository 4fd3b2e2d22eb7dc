#include "tvkey/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvkey/error.hpp"
#include "tvkey/normal.hpp"

namespace tvkey {

void AttackerParams::validate() const {
  if (!(sigma_err_mv >= 0.0) || !std::isfinite(sigma_err_mv))
    throw Error(ErrorCode::InvalidArgument, "sigma_err must be >= 0");
  if (chips < 1) throw Error(ErrorCode::InvalidArgument, "attacked chip count must be >= 1");
  if (remeasurements < 1) throw Error(ErrorCode::InvalidArgument, "remeasurements must be >= 1");
}

void DesignPoint::validate() const {
  if (!(delta_vt_mv > 0.0) || !std::isfinite(delta_vt_mv))
    throw Error(ErrorCode::InvalidArgument, "delta_vt must be > 0");
  if (key_bits == 0) throw Error(ErrorCode::InvalidArgument, "key_bits must be >= 1");
  if (!(sigma_var_mv >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma_var must be >= 0");
  if (code.m <= 0 || code.t < 0 || code.t > code.n)
    throw Error(ErrorCode::InvalidArgument, "design has no valid code");
}

double misread_probability(double delta_vt_mv, double sigma_var_mv, const AttackerParams& attacker) {
  attacker.validate();
  if (!std::isfinite(delta_vt_mv) || !(sigma_var_mv >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "invalid cell parameters");
  const double variance =
      (2.0 * sigma_var_mv * sigma_var_mv +
       2.0 * attacker.sigma_err_mv * attacker.sigma_err_mv / static_cast<double>(attacker.remeasurements)) /
      static_cast<double>(attacker.chips);
  if (variance == 0.0) {
    warn("misread_probability: zero variance, returning the degenerate limit");
    if (delta_vt_mv > 0.0) return 0.0;
    return delta_vt_mv == 0.0 ? 0.5 : 1.0;
  }
  return normal_cdf(-delta_vt_mv / std::sqrt(variance));
}

double block_read_success(int n, int t, double p_re) {
  if (!(p_re >= 0.0 && p_re <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p_re must lie in [0, 1]");
  if (n < 0 || t < 0) throw Error(ErrorCode::InvalidArgument, "n and t must be >= 0");
  if (t >= n) return 1.0;
  if (p_re == 0.0) return 1.0;
  if (p_re == 1.0) return 0.0;
  const double log_p = std::log(p_re);
  const double log_q = std::log1p(-p_re);
  const double log_n_fact = std::lgamma(n + 1.0);
  std::vector<double> logs(static_cast<std::size_t>(t) + 1);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= t; ++i) {
    const double log_binom = log_n_fact - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    logs[i] = log_binom + i * log_p + (n - i) * log_q;
    max_log = std::max(max_log, logs[i]);
  }
  double scaled = 0.0;
  for (double l : logs) scaled += std::exp(l - max_log);
  return std::min(1.0, std::exp(max_log + std::log(scaled)));
}

double block_read_success(const BchCodeSpec& code, double p_re) { return block_read_success(code.n, code.t, p_re); }

double key_read_success(const DesignPoint& design, const AttackerParams& attacker) {
  design.validate();
  const double p_re = misread_probability(design.delta_vt_mv, design.sigma_var_mv, attacker);
  const double block = block_read_success(design.code, p_re);
  if (block == 0.0) return 0.0;
  const auto blocks = static_cast<double>(blocks_for_key(design.key_bits, design.code));
  return std::exp(blocks * std::log(block));
}

std::vector<ChipCountPoint> success_vs_chips(const DesignPoint& design, double sigma_err_mv, int c_max) {
  if (c_max < 1) throw Error(ErrorCode::InvalidArgument, "c_max must be >= 1");
  std::vector<ChipCountPoint> curve;
  curve.reserve(static_cast<std::size_t>(c_max));
  for (int c = 1; c <= c_max; ++c) {
    curve.push_back({c, key_read_success(design, AttackerParams{sigma_err_mv, c})});
  }
  return curve;
}

std::uint64_t measurement_cost(const DesignPoint& design, const AttackerParams& attacker) {
  design.validate();
  attacker.validate();
  return static_cast<std::uint64_t>(attacker.chips) * 2u * static_cast<std::uint64_t>(design.code.n) *
         blocks_for_key(design.key_bits, design.code);
}

}  // namespace tvkey
