#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tvkey/cell_sim.hpp"
#include "tvkey/random.hpp"

namespace tvkey {

/// Heterogeneous error-rate model: the per-cell error probability Pe has
/// CDF(x) = Phi(lambda1 * Phi^-1(x) + lambda2).
///
/// For the latent cell model (mismatch M ~ N(mu, s^2), noise sigma_n) this
/// corresponds to lambda1 = sigma_n / s and lambda2 = mu / s.
struct MaesModel {
  double lambda1 = 1.0;
  double lambda2 = 0.0;

  void validate() const;
};

struct FitReport {
  MaesModel model;
  /// RMS residual of the probit-domain regression.
  double residual = 0.0;
  std::size_t points_used = 0;
  std::size_t points_clamped = 0;
};

double cdf_pe(const MaesModel& model, double x);

/// Least-squares fit in the probit-probit domain, where the model is linear.
///
/// The sample is sorted and each value is paired with the plotting position
/// (i - 0.5)/n; tied values share their mid-rank position. Empirical 0 and 1
/// values are clamped to 1/(2 trials) and 1 - 1/(2 trials) and counted in
/// points_clamped. Clamped points still occupy ranks, but only unclamped points
/// enter the regression, since their true location is censored. Pass
/// trials = 0 for unquantized samples (nothing is clamped; 0 and 1 are rejected).
///
/// Throws Error(DegenerateData) if fewer than two distinct unclamped values remain.
FitReport fit(std::span<const double> error_probs, std::uint32_t trials);
FitReport fit(const EmpiricalErrorData& data);

/// Inverse-transform draw: Phi((Phi^-1(U) - lambda2) / lambda1).
double sample_pe_one(const MaesModel& model, Rng& rng);
void sample_pe_into(const MaesModel& model, std::span<double> out, Rng& rng);
std::vector<double> sample_pe(const MaesModel& model, std::size_t count, Rng& rng);

}  // namespace tvkey
