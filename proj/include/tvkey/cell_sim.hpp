#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tvkey/random.hpp"

namespace tvkey {

// Nominal device thresholds of the 45nm technology the model stands in for.
// Only offsets and sigmas enter the behavioral model; these are reference values.
inline constexpr double kNominalPmosVtMv = -418.0;
inline constexpr double kNominalNmosVtMv = 469.0;

/// Behavioral parameters of a threshold-biased SRAM cell.
///
/// A cell's power-up value is sign(M + N): M is the persistent mismatch between
/// the two PMOS thresholds (one of them offset by delta_vt), N is per-evaluation
/// noise. All voltages are in mV.
struct CellPhysicalParams {
  double delta_vt_mv = 200.0;
  double sigma_var_mv = 30.0;
  double sigma_noise_mv = 40.0;
  /// Relative influence of an NMOS-side offset, used by one_probability_curve.
  double nmos_sensitivity = 0.6;

  /// Throws Error(InvalidArgument) on negative sigmas or sensitivity outside [0, 1].
  void validate() const;
};

struct CellInstance {
  double process_value_mv = 0.0;
  std::uint8_t intended_bit = 1;
};

struct EmpiricalErrorData {
  std::vector<double> error_probs;
  std::size_t cells = 0;
  std::uint32_t trials_per_cell = 0;
};

enum class Device { Pmos, Nmos };

/// Draws a manufactured cell. The mismatch is Normal(+-delta_vt, 2 sigma_var^2),
/// with the sign following the intended bit.
CellInstance sample_cell(const CellPhysicalParams& params, Rng& rng, std::uint8_t intended_bit = 1);

/// One power-up evaluation: 1 iff process value plus noise is >= 0.
std::uint8_t evaluate_cell(const CellInstance& cell, const CellPhysicalParams& params, Rng& rng);

/// Simulates `cells` cells for `trials` power-ups each. Cell i draws from
/// base.stream(i), so output is independent of `workers`.
EmpiricalErrorData simulate_population(const CellPhysicalParams& params, std::size_t cells,
                                       std::uint32_t trials, const Rng& base,
                                       std::uint8_t intended_bit = 1, unsigned workers = 1);

struct CurvePoint {
  double offset_mv;
  double probability;
};

/// Fraction of cells biased toward 1 (long-run 1-rate above one half) at each
/// offset. The NMOS curve applies the offset scaled by nmos_sensitivity.
std::vector<CurvePoint> one_probability_curve(const CellPhysicalParams& params,
                                              std::span<const double> offsets_mv, Device device,
                                              std::size_t cells, const Rng& base);

/// `cell_index,error_prob`
void write_csv(const EmpiricalErrorData& data, std::ostream& out);

}  // namespace tvkey
