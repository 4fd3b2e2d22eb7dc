#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tvkey/bch.hpp"

namespace tvkey {

/// Invasive readout attacker: each threshold measurement carries
/// Normal(0, sigma_err^2) error, and the same cell is measured on `chips`
/// chip instances and averaged.
struct AttackerParams {
  double sigma_err_mv = 200.0;
  int chips = 1;
  /// Extension, off by default (1): repeated measurements of a single chip,
  /// which average measurement error but not process variation.
  int remeasurements = 1;

  void validate() const;
};

struct DesignPoint {
  double delta_vt_mv = 200.0;
  BchCodeSpec code;
  std::size_t key_bits = 128;
  double sigma_var_mv = 30.0;

  void validate() const;
};

/// Probability of guessing a cell wrong: the CDF at 0 of
/// Normal(delta_vt, (2 sigma_var^2 + 2 sigma_err^2 / R) / C).
/// A zero variance returns 0 (delta > 0), 0.5 (delta == 0) or 1, with a warning.
double misread_probability(double delta_vt_mv, double sigma_var_mv, const AttackerParams& attacker);

/// P(at most t of the n cells of a block are misread), summed in the log domain.
double block_read_success(const BchCodeSpec& code, double p_re);
double block_read_success(int n, int t, double p_re);

/// Every one of the ceil(k/m) blocks must be read within the correction radius.
double key_read_success(const DesignPoint& design, const AttackerParams& attacker);

struct ChipCountPoint {
  int chips;
  double p_rskey;
};

/// key_read_success for C = 1..c_max.
std::vector<ChipCountPoint> success_vs_chips(const DesignPoint& design, double sigma_err_mv, int c_max);

/// Threshold measurements needed: C * 2 * n * ceil(k/m) (two PMOS devices per cell).
std::uint64_t measurement_cost(const DesignPoint& design, const AttackerParams& attacker);

}  // namespace tvkey
