#include "tvkey/cell_sim.hpp"

#include <cmath>
#include <ostream>

#include "format.hpp"
#include "parallel.hpp"
#include "tvkey/error.hpp"

namespace tvkey {

void CellPhysicalParams::validate() const {
  if (!std::isfinite(delta_vt_mv)) throw Error(ErrorCode::InvalidArgument, "delta_vt must be finite");
  if (!(sigma_var_mv >= 0.0) || !std::isfinite(sigma_var_mv))
    throw Error(ErrorCode::InvalidArgument, "sigma_var must be >= 0");
  if (!(sigma_noise_mv >= 0.0) || !std::isfinite(sigma_noise_mv))
    throw Error(ErrorCode::InvalidArgument, "sigma_noise must be >= 0");
  if (!(nmos_sensitivity >= 0.0 && nmos_sensitivity <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "nmos_sensitivity must lie in [0, 1]");
}

CellInstance sample_cell(const CellPhysicalParams& params, Rng& rng, std::uint8_t intended_bit) {
  // Difference of two independently varying thresholds.
  const double sigma_mismatch = std::sqrt(2.0) * params.sigma_var_mv;
  const double mean = intended_bit ? params.delta_vt_mv : -params.delta_vt_mv;
  const double value = sigma_mismatch == 0.0 ? mean : mean + sigma_mismatch * rng.normal();
  return {value, static_cast<std::uint8_t>(intended_bit ? 1 : 0)};
}

std::uint8_t evaluate_cell(const CellInstance& cell, const CellPhysicalParams& params, Rng& rng) {
  const double noise = params.sigma_noise_mv == 0.0 ? 0.0 : params.sigma_noise_mv * rng.normal();
  return cell.process_value_mv + noise >= 0.0 ? 1 : 0;
}

EmpiricalErrorData simulate_population(const CellPhysicalParams& params, std::size_t cells,
                                       std::uint32_t trials, const Rng& base,
                                       std::uint8_t intended_bit, unsigned workers) {
  params.validate();
  if (cells == 0) throw Error(ErrorCode::InvalidArgument, "cells must be >= 1");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");

  EmpiricalErrorData data;
  data.cells = cells;
  data.trials_per_cell = trials;
  data.error_probs.assign(cells, 0.0);
  detail::parallel_for(cells, workers, [&](std::size_t i) {
    Rng rng = base.stream(i);
    const CellInstance cell = sample_cell(params, rng, intended_bit);
    std::uint32_t errors = 0;
    for (std::uint32_t k = 0; k < trials; ++k) {
      if (evaluate_cell(cell, params, rng) != cell.intended_bit) ++errors;
    }
    data.error_probs[i] = static_cast<double>(errors) / static_cast<double>(trials);
  });
  return data;
}

std::vector<CurvePoint> one_probability_curve(const CellPhysicalParams& params,
                                              std::span<const double> offsets_mv, Device device,
                                              std::size_t cells, const Rng& base) {
  params.validate();
  if (cells == 0) throw Error(ErrorCode::InvalidArgument, "cells must be >= 1");
  std::vector<CurvePoint> curve;
  curve.reserve(offsets_mv.size());
  for (std::size_t j = 0; j < offsets_mv.size(); ++j) {
    const double offset = offsets_mv[j];
    if (!std::isfinite(offset)) throw Error(ErrorCode::InvalidArgument, "offsets must be finite");
    CellPhysicalParams p = params;
    p.delta_vt_mv = device == Device::Pmos ? offset : params.nmos_sensitivity * offset;
    // Same cell population at every offset and for both devices, so the curves
    // differ only through the applied offset.
    std::size_t biased = 0;
    for (std::size_t i = 0; i < cells; ++i) {
      Rng rng = base.stream(i);
      // The long-run 1-rate is normal_cdf(M / sigma_noise), above 1/2 iff M > 0.
      if (sample_cell(p, rng).process_value_mv > 0.0) ++biased;
    }
    curve.push_back({offset, static_cast<double>(biased) / static_cast<double>(cells)});
  }
  return curve;
}

void write_csv(const EmpiricalErrorData& data, std::ostream& out) {
  out << "cell_index,error_prob\n";
  for (std::size_t i = 0; i < data.error_probs.size(); ++i) {
    out << i << ',' << detail::format_double(data.error_probs[i]) << '\n';
  }
}

}  // namespace tvkey
