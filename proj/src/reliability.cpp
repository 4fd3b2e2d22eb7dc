#include "tvkey/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "parallel.hpp"
#include "tvkey/error.hpp"

namespace tvkey {

void ReliabilityCriterion::validate() const {
  if (!(chip_quantile > 0.0 && chip_quantile < 1.0))
    throw Error(ErrorCode::InvalidArgument, "chip_quantile must lie in (0, 1)");
  if (!(max_key_failure > 0.0 && max_key_failure < 1.0))
    throw Error(ErrorCode::InvalidArgument, "max_key_failure must lie in (0, 1)");
}

std::size_t ReliabilityCriterion::min_chips() const {
  return static_cast<std::size_t>(std::ceil(10.0 / (1.0 - chip_quantile) - 1e-9));
}

namespace {

void check_profile(int t, std::span<const double> pe) {
  if (t < 0) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
  for (double p : pe) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "error probabilities must lie in [0, 1]");
  }
}

}  // namespace

double poisson_binomial_cdf(int t, std::span<const double> pe) {
  check_profile(t, pe);
  const std::size_t n = pe.size();
  if (static_cast<std::size_t>(t) >= n) return 1.0;

  const double omega = 2.0 * std::numbers::pi / static_cast<double>(n + 1);
  // Terms m and n+1-m are complex conjugates, so only half are evaluated.
  double sum = 0.0;
  for (std::size_t m = 1; 2 * m <= n + 1; ++m) {
    const double theta = omega * static_cast<double>(m);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    // Characteristic function prod_k (1 - p_k + p_k e^{j theta}).
    double re = 1.0, im = 0.0;
    for (double p : pe) {
      const double fr = 1.0 - p + p * c;
      const double fi = p * s;
      const double nr = re * fr - im * fi;
      im = re * fi + im * fr;
      re = nr;
    }
    // (1 - e^{-j theta (t+1)}) / (1 - e^{-j theta})
    const double phase = theta * static_cast<double>(t + 1);
    const double ar = 1.0 - std::cos(phase), ai = std::sin(phase);
    const double br = 1.0 - c, bi = s;
    const double denom = br * br + bi * bi;
    const double gr = (ar * br + ai * bi) / denom;
    const double gi = (ai * br - ar * bi) / denom;
    const double term = gr * re - gi * im;
    sum += (2 * m == n + 1) ? term : 2.0 * term;
  }
  const double cdf = (static_cast<double>(t + 1) + sum) / static_cast<double>(n + 1);
  return std::clamp(cdf, 0.0, 1.0);
}

double poisson_binomial_cdf_dp(int t, std::span<const double> pe) {
  check_profile(t, pe);
  const std::size_t n = pe.size();
  if (static_cast<std::size_t>(t) >= n) return 1.0;
  // dist[j] = P(j errors so far), tracked only for j <= t.
  std::vector<double> dist(static_cast<std::size_t>(t) + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = pe[k];
    const std::size_t top = std::min<std::size_t>(k + 1, static_cast<std::size_t>(t));
    for (std::size_t j = top; j > 0; --j) dist[j] = dist[j] * (1.0 - p) + dist[j - 1] * p;
    dist[0] *= 1.0 - p;
  }
  double cdf = 0.0;
  for (double d : dist) cdf += d;
  return std::clamp(cdf, 0.0, 1.0);
}

double block_failure(int t, std::span<const double> pe) {
  check_profile(t, pe);
  if (static_cast<std::size_t>(t) >= pe.size()) return 0.0;
  // Same recurrence as the DP CDF, with every count above t absorbed into
  // `beyond`. The tail is then a sum of nonnegative terms instead of 1 - cdf,
  // so failures far below machine epsilon keep their relative accuracy.
  std::vector<double> dist(static_cast<std::size_t>(t) + 1, 0.0);
  dist[0] = 1.0;
  double beyond = 0.0;
  const auto top_index = static_cast<std::size_t>(t);
  for (std::size_t k = 0; k < pe.size(); ++k) {
    const double p = pe[k];
    if (p == 0.0) continue;
    beyond += dist[top_index] * p;
    const std::size_t top = std::min(k + 1, top_index);
    for (std::size_t j = top; j > 0; --j) dist[j] = dist[j] * (1.0 - p) + dist[j - 1] * p;
    dist[0] *= 1.0 - p;
  }
  return std::clamp(beyond, 0.0, 1.0);
}

double key_failure(std::span<const double> block_failures) {
  double log_survival = 0.0;
  for (double p : block_failures) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "block failures must lie in [0, 1]");
    if (p == 1.0) return 1.0;
    log_survival += std::log1p(-p);
  }
  return -std::expm1(log_survival);
}

double sample_chip_key_failure(const MaesModel& model, const BchCodeSpec& code, std::size_t key_bits, Rng& rng,
                               int majority_votes) {
  const std::size_t blocks = blocks_for_key(key_bits, code);
  std::vector<double> profile(static_cast<std::size_t>(code.n));
  std::vector<double> failures(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    sample_pe_into(model, profile, rng);
    if (majority_votes != 1) {
      for (double& pe : profile) pe = majority_vote(pe, majority_votes);
    }
    failures[b] = block_failure(code.t, profile);
  }
  return key_failure(failures);
}

KeyFailureDistribution key_failure_distribution(const MaesModel& model, const BchCodeSpec& code,
                                                std::size_t key_bits, std::size_t chips, const Rng& base,
                                                unsigned workers, int majority_votes) {
  model.validate();
  if (key_bits == 0) throw Error(ErrorCode::InvalidArgument, "key_bits must be >= 1");
  if (chips == 0) throw Error(ErrorCode::InvalidArgument, "chips must be >= 1");
  if (majority_votes < 1 || majority_votes % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "majority_votes must be odd and >= 1");
  KeyFailureDistribution dist;
  dist.samples.assign(chips, 0.0);
  detail::parallel_for(chips, workers, [&](std::size_t i) {
    Rng rng = base.stream(i);
    dist.samples[i] = sample_chip_key_failure(model, code, key_bits, rng, majority_votes);
  });
  return dist;
}

double nearest_rank_quantile(std::span<const double> samples, double q) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientSamples, "no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()) - 1e-9));
  const std::size_t index = std::clamp<std::size_t>(rank, 1, sorted.size()) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(index), sorted.end());
  return sorted[index];
}

CriterionResult check_criterion(const KeyFailureDistribution& dist, const ReliabilityCriterion& criterion) {
  criterion.validate();
  if (dist.chips() < criterion.min_chips()) {
    throw Error(ErrorCode::InsufficientSamples, "criterion at quantile " + std::to_string(criterion.chip_quantile) +
                                                    " needs at least " + std::to_string(criterion.min_chips()) +
                                                    " chips, got " + std::to_string(dist.chips()));
  }
  const double value = nearest_rank_quantile(dist.samples, criterion.chip_quantile);
  return {value < criterion.max_key_failure, value};
}

CodeSelection select_minimal_code(const MaesModel& model, std::size_t key_bits, const ReliabilityCriterion& criterion,
                                  std::span<const BchCodeSpec> candidates, std::size_t chips, const Rng& base,
                                  int majority_votes) {
  model.validate();
  criterion.validate();
  if (chips < criterion.min_chips()) {
    throw Error(ErrorCode::InsufficientSamples, "need at least " + std::to_string(criterion.min_chips()) + " chips");
  }
  const auto rank = static_cast<std::size_t>(std::ceil(criterion.chip_quantile * static_cast<double>(chips) - 1e-9));
  // The nearest-rank quantile reaches the bound once this many samples do.
  const std::size_t failing_limit = chips - rank + 1;

  for (const BchCodeSpec& code : candidates) {
    KeyFailureDistribution dist;
    dist.samples.reserve(chips);
    std::size_t failing = 0;
    for (std::size_t i = 0; i < chips && failing < failing_limit; ++i) {
      Rng rng = base.stream(i);
      const double sample = sample_chip_key_failure(model, code, key_bits, rng, majority_votes);
      if (sample >= criterion.max_key_failure) ++failing;
      dist.samples.push_back(sample);
    }
    if (failing >= failing_limit) continue;
    const CriterionResult result = check_criterion(dist, criterion);
    if (result.pass) return {code, result, std::move(dist)};
  }
  throw Error(ErrorCode::NoFeasibleCode, "no candidate code meets the reliability criterion");
}

double majority_vote(double pe, int r) {
  if (r < 1 || r % 2 == 0) throw Error(ErrorCode::InvalidArgument, "majority vote count must be odd and >= 1");
  if (!(pe >= 0.0 && pe <= 1.0)) throw Error(ErrorCode::InvalidArgument, "error probability must lie in [0, 1]");
  if (r == 1) return pe;
  double total = 0.0;
  double binom = 1.0;  // C(r, i), built incrementally
  for (int i = 0; i <= r; ++i) {
    if (i > 0) binom = binom * static_cast<double>(r - i + 1) / static_cast<double>(i);
    if (2 * i > r) total += binom * std::pow(pe, i) * std::pow(1.0 - pe, r - i);
  }
  return std::clamp(total, 0.0, 1.0);
}

std::vector<double> majority_vote_transform(std::span<const double> pe, int r) {
  std::vector<double> out;
  out.reserve(pe.size());
  for (double p : pe) out.push_back(majority_vote(p, r));
  return out;
}

}  // namespace tvkey
