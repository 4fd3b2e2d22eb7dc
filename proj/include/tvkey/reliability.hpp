#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tvkey/bch.hpp"
#include "tvkey/error_model.hpp"
#include "tvkey/random.hpp"

namespace tvkey {

// A block error profile is the list of per-cell error probabilities of the n
// cells holding one code block; it is passed around as std::span<const double>.

/// At least `chip_quantile` of chips must have key failure below `max_key_failure`.
struct ReliabilityCriterion {
  double chip_quantile = 0.99;
  double max_key_failure = 1e-6;

  void validate() const;
  /// Smallest chip count for which the quantile is estimable: ceil(10 / (1 - q)).
  std::size_t min_chips() const;
};

struct KeyFailureDistribution {
  std::vector<double> samples;

  std::size_t chips() const { return samples.size(); }
};

inline constexpr std::size_t kDefaultChips = 1000;

/// P(number of errors <= t) by the discrete Fourier form of the
/// Poisson-binomial CDF (characteristic function sampled at the n+1 roots of unity).
double poisson_binomial_cdf(int t, std::span<const double> pe);

/// Same quantity by O(n t) dynamic programming over the error count.
double poisson_binomial_cdf_dp(int t, std::span<const double> pe);

/// P(more than t errors) = 1 - poisson_binomial_cdf, accumulated as an upper
/// tail so that tiny failure rates are not lost to cancellation.
double block_failure(int t, std::span<const double> pe);

/// 1 - prod(1 - p_i), accumulated in the log domain.
double key_failure(std::span<const double> block_failures);

/// One simulated chip: ceil(k/m) freshly sampled block profiles, combined.
/// `majority_votes` (odd) applies the majority-vote transform to each cell first.
double sample_chip_key_failure(const MaesModel& model, const BchCodeSpec& code, std::size_t key_bits, Rng& rng,
                               int majority_votes = 1);

/// Chip i uses base.stream(i).
KeyFailureDistribution key_failure_distribution(const MaesModel& model, const BchCodeSpec& code,
                                                std::size_t key_bits, std::size_t chips, const Rng& base,
                                                unsigned workers = 1, int majority_votes = 1);

/// Nearest-rank quantile of the samples (q in (0, 1)).
double nearest_rank_quantile(std::span<const double> samples, double q);

struct CriterionResult {
  bool pass = false;
  double percentile_value = 0.0;
};

/// Throws Error(InsufficientSamples) when fewer than criterion.min_chips() samples.
CriterionResult check_criterion(const KeyFailureDistribution& dist, const ReliabilityCriterion& criterion);

struct CodeSelection {
  BchCodeSpec code;
  CriterionResult criterion;
  KeyFailureDistribution distribution;
};

/// Returns the first candidate (candidates ordered by ascending t) whose key
/// failure distribution passes. Every candidate is evaluated on the same chip
/// streams. Chip sampling for a failing candidate stops as soon as the outcome
/// is decided. Throws Error(NoFeasibleCode).
CodeSelection select_minimal_code(const MaesModel& model, std::size_t key_bits, const ReliabilityCriterion& criterion,
                                  std::span<const BchCodeSpec> candidates, std::size_t chips, const Rng& base,
                                  int majority_votes = 1);

/// Probability that a majority of r independent reads is wrong.
double majority_vote(double pe, int r);
std::vector<double> majority_vote_transform(std::span<const double> pe, int r);

}  // namespace tvkey
