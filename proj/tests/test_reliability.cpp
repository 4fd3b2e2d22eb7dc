#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <algorithm>
#include <cmath>
#include <vector>

#include "tvkey/bch.hpp"
#include "tvkey/error.hpp"
#include "tvkey/error_model.hpp"
#include "tvkey/reliability.hpp"

using namespace tvkey;

namespace {

// Brute-force sum over all 2^n outcomes.
double enumerate_cdf(int t, const std::vector<double>& pe) {
  const std::size_t n = pe.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    if (__builtin_popcountll(mask) > t) continue;
    double prob = 1.0;
    for (std::size_t k = 0; k < n; ++k) prob *= (mask >> k & 1) ? pe[k] : 1.0 - pe[k];
    total += prob;
  }
  return total;
}

// Full-count convolution, independent of the library's truncated recurrence.
double convolution_cdf(int t, const std::vector<double>& pe) {
  std::vector<double> dist{1.0};
  for (double p : pe) {
    std::vector<double> next(dist.size() + 1, 0.0);
    for (std::size_t j = 0; j < dist.size(); ++j) {
      next[j] += dist[j] * (1.0 - p);
      next[j + 1] += dist[j] * p;
    }
    dist = std::move(next);
  }
  double s = 0.0;
  for (int j = 0; j <= t && j < static_cast<int>(dist.size()); ++j) s += dist[j];
  return s;
}

double binomial_cdf(int t, int n, double p) {
  return boost::math::cdf(boost::math::binomial_distribution<double>(n, p), t);
}

KeyFailureDistribution constant_dist(std::size_t chips, double value) {
  return KeyFailureDistribution{std::vector<double>(chips, value)};
}

}  // namespace

TEST_CASE("Poisson-binomial worked examples") {
  const std::vector<double> pe{0.1, 0.2, 0.3};
  CHECK(poisson_binomial_cdf(1, pe) == doctest::Approx(0.902).epsilon(1e-12));
  CHECK(poisson_binomial_cdf_dp(1, pe) == doctest::Approx(0.902).epsilon(1e-12));
  CHECK(poisson_binomial_cdf(0, pe) == doctest::Approx(0.504).epsilon(1e-12));
  CHECK(poisson_binomial_cdf(3, pe) == 1.0);
  CHECK(poisson_binomial_cdf_dp(3, pe) == 1.0);
  CHECK(poisson_binomial_cdf(7, pe) == 1.0);
  const std::vector<double> half(10, 0.5);
  CHECK(poisson_binomial_cdf(5, half) == doctest::Approx(0.623046875).epsilon(1e-12));
  CHECK(poisson_binomial_cdf_dp(5, half) == doctest::Approx(0.623046875).epsilon(1e-12));
  CHECK(poisson_binomial_cdf(0, std::vector<double>{}) == 1.0);
}

TEST_CASE("Poisson-binomial input validation") {
  const std::vector<double> pe{0.1, 0.2};
  CHECK_THROWS_AS(poisson_binomial_cdf(-1, pe), Error);
  CHECK_THROWS_AS(poisson_binomial_cdf_dp(-1, pe), Error);
  CHECK_THROWS_AS((poisson_binomial_cdf(1, std::vector<double>{0.1, 1.2})), Error);
  CHECK_THROWS_AS((poisson_binomial_cdf_dp(1, std::vector<double>{-0.1})), Error);
  CHECK_THROWS_AS((block_failure(1, std::vector<double>{std::nan("")})), Error);
}

TEST_CASE("DFT and DP agree with enumeration on small profiles") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 14);
    std::vector<double> pe(static_cast<std::size_t>(n));
    for (double& p : pe) p = rng.uniform();
    for (int t = 0; t <= n; ++t) {
      const double exact = enumerate_cdf(t, pe);
      REQUIRE(std::abs(poisson_binomial_cdf(t, pe) - exact) < 1e-12);
      REQUIRE(std::abs(poisson_binomial_cdf_dp(t, pe) - exact) < 1e-13);
    }
  }
}

TEST_CASE("DFT matches full convolution for n up to 64 and at n = 255") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 64);
    std::vector<double> pe(static_cast<std::size_t>(n));
    for (double& p : pe) p = rng.uniform() * (trial % 2 ? 1.0 : 0.05);
    for (int t = 0; t <= n; ++t) REQUIRE(std::abs(poisson_binomial_cdf(t, pe) - convolution_cdf(t, pe)) < 1e-9);
  }
  std::vector<double> pe(255);
  for (double& p : pe) p = rng.uniform() * 0.2;
  for (int t = 0; t <= 255; ++t) CHECK(std::abs(poisson_binomial_cdf(t, pe) - convolution_cdf(t, pe)) < 1e-6);
}

TEST_CASE("equal probabilities reduce to the binomial CDF") {
  for (double p : {1e-4, 0.01, 0.1, 0.3, 0.5, 0.77}) {
    const std::vector<double> pe(255, p);
    for (int t = 0; t <= 255; t += 3) {
      CAPTURE(p);
      CAPTURE(t);
      CHECK(std::abs(poisson_binomial_cdf(t, pe) - binomial_cdf(t, 255, p)) < 1e-10);
    }
  }
}

TEST_CASE("block_failure") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> pe(1 + rng.next_u64() % 60);
    for (double& p : pe) p = rng.uniform() * 0.3;
    for (int t = 0; t <= static_cast<int>(pe.size()); ++t)
      REQUIRE(std::abs(block_failure(t, pe) - (1.0 - convolution_cdf(t, pe))) < 1e-12);
  }
  // Tiny tails keep their relative accuracy: 255 cells at 1e-6, more than 2 errors.
  const double p = 1e-6;
  CHECK(block_failure(2, std::vector<double>(255, p)) ==
        doctest::Approx(boost::math::ibeta(3.0, 253.0, p)).epsilon(1e-9));
  CHECK(block_failure(3, std::vector<double>(255, 0.0)) == 0.0);
  CHECK(block_failure(1, std::vector<double>{0.1, 0.2, 0.3}) == doctest::Approx(0.098).epsilon(1e-10));
  CHECK(block_failure(3, std::vector<double>{0.1, 0.2, 0.3}) == 0.0);
  CHECK(block_failure(0, std::vector<double>{1.0}) == 1.0);
}

TEST_CASE("key_failure") {
  CHECK(key_failure(std::vector<double>{0.3}) == doctest::Approx(0.3));
  CHECK(key_failure(std::vector<double>{0.1, 0.2}) == doctest::Approx(0.28));
  CHECK(key_failure(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
  CHECK(key_failure(std::vector<double>{0.5, 1.0}) == 1.0);
  CHECK(key_failure(std::vector<double>{1e-30, 2e-30}) == doctest::Approx(3e-30));
  CHECK(key_failure(std::vector<double>{}) == 0.0);
  CHECK_THROWS_AS((key_failure(std::vector<double>{1.5})), Error);
}

TEST_CASE("key_failure is monotone in each block failure") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> f(3);
    for (double& x : f) x = rng.uniform() * 0.1;
    const double base = key_failure(f);
    const std::size_t i = rng.next_u64() % 3;
    f[i] = std::min(1.0, f[i] + rng.uniform() * 0.01);
    CHECK(key_failure(f) >= base);
  }
}

TEST_CASE("chip key failure sampling") {
  const BchCodeSpec c42 = build_code(42), c18 = build_code(18);
  Rng rng(4);
  CHECK(sample_chip_key_failure({1.0, 20.0}, c18, 128, rng) == 0.0);
  const double v = sample_chip_key_failure({0.94, 4.7}, c42, 128, rng);
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);

  // Three freshly sampled blocks for (255,47,42): reproduce by hand from the same stream.
  Rng a(99), b(99);
  const double lib = sample_chip_key_failure({0.9, 3.0}, c42, 128, a);
  std::vector<double> failures;
  for (int blk = 0; blk < 3; ++blk) {
    std::vector<double> profile(255);
    sample_pe_into({0.9, 3.0}, profile, b);
    failures.push_back(block_failure(42, profile));
  }
  CHECK(lib == doctest::Approx(key_failure(failures)).epsilon(1e-14));
}

TEST_CASE("key_failure_distribution shape and determinism") {
  const BchCodeSpec code = build_code(18);
  const MaesModel model{0.94, 4.7};
  const auto d1 = key_failure_distribution(model, code, 128, 1000, Rng(5));
  const auto d2 = key_failure_distribution(model, code, 128, 1000, Rng(5), 3);
  CHECK(d1.chips() == 1000);
  for (double s : d1.samples) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  CHECK(d1.samples == d2.samples);
  CHECK_THROWS_AS(key_failure_distribution(model, code, 0, 10, Rng(1)), Error);
  CHECK_THROWS_AS(key_failure_distribution(model, code, 128, 0, Rng(1)), Error);
  CHECK_THROWS_AS(key_failure_distribution(model, code, 128, 10, Rng(1), 1, 2), Error);
}

TEST_CASE("collapsed model gives identical chips") {
  // As lambda1 -> 0, Pe = Phi((z - lambda2) / lambda1) goes to 0 when z < lambda2 and to 1 otherwise,
  // so the collapse is a point mass at 0 only once P(z > lambda2) is negligible.
  for (double l1 : {1e-3, 1e-6}) {
    Rng rng(6);
    const auto pe = sample_pe({l1, 8.0}, 10000, rng);
    CHECK(*std::max_element(pe.begin(), pe.end()) < 1e-6);
  }
  Rng rng(6);
  const auto split = sample_pe({1e-6, 2.0}, 10000, rng);
  const auto ones = std::count_if(split.begin(), split.end(), [](double x) { return x > 0.5; });
  CHECK(ones > 150);
  CHECK(ones < 320);
  const auto d = key_failure_distribution({1e-6, 8.0}, build_code(11), 128, 200, Rng(6));
  const auto [lo, hi] = std::minmax_element(d.samples.begin(), d.samples.end());
  CHECK(*hi - *lo < 1e-6);
}

TEST_CASE("stronger codes do not worsen the tail") {
  const MaesModel model{1.1, 3.3};
  double previous = 1.0;
  for (int t : {11, 13, 18, 25, 42}) {
    const auto d = key_failure_distribution(model, build_code(t), 128, 1000, Rng(7));
    const double q = nearest_rank_quantile(d.samples, 0.99);
    CHECK(q <= previous * (1.0 + 1e-9));
    previous = q;
  }
}

TEST_CASE("nearest-rank quantile") {
  std::vector<double> s;
  for (int i = 1; i <= 100; ++i) s.push_back(i);
  CHECK(nearest_rank_quantile(s, 0.99) == 99.0);
  CHECK(nearest_rank_quantile(s, 0.5) == 50.0);
  CHECK(nearest_rank_quantile(s, 0.001) == 1.0);
  CHECK(nearest_rank_quantile(std::vector<double>{7.0}, 0.99) == 7.0);
  CHECK_THROWS_AS((nearest_rank_quantile(std::vector<double>{}, 0.5)), Error);
}

TEST_CASE("check_criterion") {
  const ReliabilityCriterion crit;
  CHECK(crit.min_chips() == 1000);
  CHECK(ReliabilityCriterion{0.9, 1e-6}.min_chips() == 100);
  CHECK(check_criterion(constant_dist(1000, 0.0), crit).pass);
  CHECK_FALSE(check_criterion(constant_dist(1000, 1.0), crit).pass);

  KeyFailureDistribution mixed = constant_dist(1000, 1e-8);
  for (int i = 989; i < 1000; ++i) mixed.samples[i] = 1e-3;
  const auto r = check_criterion(mixed, crit);
  CHECK_FALSE(r.pass);
  CHECK(r.percentile_value == 1e-3);

  KeyFailureDistribution ten = constant_dist(1000, 1e-8);
  for (int i = 990; i < 1000; ++i) ten.samples[i] = 1e-3;
  CHECK(check_criterion(ten, crit).pass);

  // Exactly at the bound is not below it.
  CHECK_FALSE(check_criterion(constant_dist(1000, 1e-6), crit).pass);

  try {
    check_criterion(constant_dist(999, 0.0), crit);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSamples);
  }
  CHECK_THROWS_AS((check_criterion(constant_dist(1000, 0.0), {1.0, 1e-6})), Error);
  CHECK_THROWS_AS((check_criterion(constant_dist(1000, 0.0), {0.99, 0.0})), Error);
}

TEST_CASE("check_criterion is monotone under a worse sample") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    KeyFailureDistribution d;
    for (int i = 0; i < 1000; ++i) d.samples.push_back(std::pow(10.0, -12.0 + 8.0 * rng.uniform()));
    const bool before = check_criterion(d, {}).pass;
    const auto worst = std::max_element(d.samples.begin(), d.samples.end());
    d.samples.push_back(*worst * 10.0);
    const bool after = check_criterion(d, {}).pass;
    if (!before) CHECK_FALSE(after);
  }
}

TEST_CASE("select_minimal_code") {
  std::vector<BchCodeSpec> candidates;
  for (int t : {11, 13, 18, 25, 42}) candidates.push_back(build_code(t));
  const ReliabilityCriterion crit;

  SUBCASE("near-perfect model picks the weakest") {
    const auto sel = select_minimal_code({1.0, 20.0}, 128, crit, candidates, 1000, Rng(1));
    CHECK(sel.code.t == 11);
    CHECK(sel.criterion.pass);
    CHECK(sel.distribution.chips() == 1000);
  }
  SUBCASE("hopeless model") {
    try {
      select_minimal_code({1.0, 0.0}, 128, crit, candidates, 1000, Rng(1));
      FAIL("expected NoFeasibleCode");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoFeasibleCode);
    }
  }
  SUBCASE("agrees with full distributions and early stopping") {
    const MaesModel model{0.95, 4.4};
    const Rng base(12);
    const auto sel = select_minimal_code(model, 128, crit, candidates, 1000, base);
    const BchCodeSpec* expected = nullptr;
    for (const auto& c : candidates) {
      if (check_criterion(key_failure_distribution(model, c, 128, 1000, base), crit).pass) {
        expected = &c;
        break;
      }
    }
    REQUIRE(expected != nullptr);
    CHECK(sel.code.t == expected->t);
    CHECK(sel.distribution.samples == key_failure_distribution(model, *expected, 128, 1000, base).samples);
  }
  SUBCASE("too few chips") { CHECK_THROWS_AS(select_minimal_code({1, 20}, 128, crit, candidates, 999, Rng(1)), Error); }
}

TEST_CASE("majority vote") {
  CHECK(majority_vote(0.1, 3) == doctest::Approx(0.028).epsilon(1e-12));
  for (int r : {1, 3, 5, 7, 9}) CHECK(majority_vote(0.5, r) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(majority_vote(0.37, 1) == 0.37);
  CHECK(majority_vote(0.0, 5) == 0.0);
  CHECK(majority_vote(1.0, 5) == 1.0);
  CHECK_THROWS_AS(majority_vote(0.1, 2), Error);
  CHECK_THROWS_AS(majority_vote(0.1, 0), Error);
  CHECK_THROWS_AS(majority_vote(1.1, 3), Error);

  for (int r : {3, 5, 9, 15}) {
    for (double p = 0.01; p < 0.5; p += 0.01) CHECK(majority_vote(p, r) < p);
    for (double p = 0.51; p < 1.0; p += 0.01) CHECK(majority_vote(p, r) > p);
    // Independent oracle: the upper binomial tail.
    for (double p : {0.02, 0.2, 0.45}) {
      const double tail = 1.0 - binomial_cdf(r / 2, r, p);
      CHECK(majority_vote(p, r) == doctest::Approx(tail).epsilon(1e-12));
    }
  }
  const auto v = majority_vote_transform(std::vector<double>{0.1, 0.5, 0.9}, 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.028));
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == doctest::Approx(0.972));
}
