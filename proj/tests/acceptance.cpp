// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 only when the failing criteria are exactly those named by
// --known-failures (comma separated). A criterion that fails unexpectedly, or
// a known failure that starts passing, makes the run fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tvkey/explorer.hpp"

using namespace tvkey;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const std::vector<std::pair<double, int>> kTable1Codes = {{100, 42}, {150, 25}, {200, 18}, {250, 13}, {300, 11}};

Outcome table1_attack() {
  const double expected[] = {8.99e-36, 1.45e-28, 5.26e-13, 6.90e-11, 7.66e-08};
  Outcome o{true, ""};
  for (std::size_t i = 0; i < kTable1Codes.size(); ++i) {
    const auto [delta, t] = kTable1Codes[i];
    const double got = key_read_success({delta, build_code(t), 128, 30.0}, {200.0, 1});
    const double ratio = got / expected[i];
    const bool ok = ratio <= 2.0 && ratio >= 0.5;
    o.pass = o.pass && ok;
    o.detail += (i ? "; " : "") + fixed(delta, 0) + ": " + sci(got) + " vs " + sci(expected[i]) + " (x" +
                fixed(ratio, 3) + (ok ? ")" : ", outside factor 2)");
  }
  return o;
}

Outcome multi_chip_example() {
  const DesignPoint d{100.0, build_code(42), 128, 30.0};
  const AttackerParams a{200.0, 9};
  const double p = key_read_success(d, a);
  const std::uint64_t cost = measurement_cost(d, a);
  return {p > 0.53 && cost == 13770 && d.code.m == 47,
          "P_RSkey=" + fixed(p, 6) + " (> 0.53), measurements=" + std::to_string(cost) + " (13770)"};
}

Outcome poisson_binomial() {
  Rng rng(Rng(42).stream(301));
  double worst_dp = 0.0;
  std::size_t checks = 0;
  for (int profile = 0; profile < 1000; ++profile) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 64.0) % 64;
    std::vector<double> pe(n);
    // Mix of spreads so that both flat and strongly skewed profiles occur.
    const double scale = std::pow(10.0, -4.0 * rng.uniform());
    for (double& p : pe) p = std::min(1.0, scale * rng.uniform());
    for (int t = 0; t <= static_cast<int>(n); ++t) {
      worst_dp = std::max(worst_dp, std::abs(poisson_binomial_cdf(t, pe) - poisson_binomial_cdf_dp(t, pe)));
      ++checks;
    }
  }
  // Exact binomial CDF by a log-domain sum of terms, for equal probabilities.
  double worst_binom = 0.0;
  for (double p : {1e-4, 0.01, 0.1, 0.3, 0.5, 0.9}) {
    const std::vector<double> pe(255, p);
    double sum = 0.0;
    for (int t = 0; t <= 255; ++t) {
      const double log_term = std::lgamma(256.0) - std::lgamma(t + 1.0) - std::lgamma(256.0 - t) +
                              t * std::log(p) + (255 - t) * std::log1p(-p);
      sum += std::exp(log_term);
      worst_binom = std::max(worst_binom, std::abs(poisson_binomial_cdf(t, pe) - std::min(sum, 1.0)));
    }
  }
  return {worst_dp <= 1e-9 && worst_binom <= 1e-10, std::to_string(checks) + " (profile, t) pairs, max |DFT-DP|=" +
                                                        sci(worst_dp) + " (1e-9); max |DFT-binomial|=" +
                                                        sci(worst_binom) + " (1e-10)"};
}

Outcome bch_codec() {
  const std::vector<std::pair<int, int>> nm = {{255, 171}, {255, 155}, {255, 131}, {255, 91}, {255, 47}};
  const int ts[] = {11, 13, 18, 25, 42};
  Outcome o{true, ""};
  Rng base(Rng(42).stream(401));
  for (std::size_t i = 0; i < 5; ++i) {
    const BchCodeSpec code = build_code(ts[i]);
    const bool params = code.n == nm[i].first && code.m == nm[i].second;
    Rng rng = base.stream(static_cast<std::uint64_t>(ts[i]));
    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      BitVector message(static_cast<std::size_t>(code.m));
      for (auto& b : message) b = rng.bit() ? 1 : 0;
      BitVector block = encode(code, message);
      const int errors = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(code.t + 1));
      std::vector<std::size_t> positions(static_cast<std::size_t>(code.n));
      for (std::size_t p = 0; p < positions.size(); ++p) positions[p] = p;
      for (int e = 0; e < errors; ++e) {
        const std::size_t j = e + rng.next_u64() % (positions.size() - e);
        std::swap(positions[e], positions[j]);
        block[positions[e]] ^= 1;
      }
      const DecodeResult r = decode(code, block);
      if (r.ok() && *r.message == message && r.corrected == errors) ++ok;
    }
    o.pass = o.pass && params && ok == 1000;
    o.detail += (i ? "; " : "") + std::string("(") + std::to_string(code.n) + "," + std::to_string(code.m) + "," +
                std::to_string(code.t) + ") " + std::to_string(ok) + "/1000" + (params ? "" : " params mismatch");
  }
  return o;
}

Outcome calibrated_pairings() {
  const FlowConfig config;
  CalibrationResult result;
  try {
    result = calibrate_noise(config);
  } catch (const CalibrationError& e) {
    result = e.best();
  }
  std::string pairs;
  for (const auto& [offset, t] : result.selected_t) {
    pairs += (pairs.empty() ? "" : " ") + fixed(offset, 0) + "->" + (t ? std::to_string(t) : std::string("none")) +
             "(" + std::to_string(config.calibration_targets.at(offset)) + ")";
  }
  const bool anchor = result.selected_t.count(200.0) && result.selected_t.at(200.0) == 18;
  return {result.matches >= 4 && anchor, "best " + std::to_string(result.matches) + "/" +
                                             std::to_string(result.targets) + " at sigma_noise=" +
                                             fixed(result.sigma_noise_mv, 3) + " mV; " + pairs};
}

Outcome closed_form_vs_empirical() {
  const DesignPoint d{100.0, build_code(42), 128, 30.0};
  int contained = 0, eligible = 0;
  std::string detail;
  for (int c : {8, 9, 10}) {
    const AttackerParams a{200.0, c};
    const double predicted = key_read_success(d, a);
    if (predicted < 0.01 || predicted > 0.99) continue;
    ++eligible;
    const EmpiricalRate r = end_to_end_attack_sim(d, a, 10000, Rng(42).stream(600 + c));
    const bool in = r.ci_low <= predicted && predicted <= r.ci_high;
    contained += in;
    detail += (detail.empty() ? "" : "; ") + std::string("C=") + std::to_string(c) + " closed " + fixed(predicted) +
              " empirical " + fixed(r.rate) + " [" + fixed(r.ci_low) + "," + fixed(r.ci_high) + "]" +
              (in ? "" : " MISS");
  }
  return {contained >= 3, std::to_string(contained) + "/" + std::to_string(eligible) + " contained; " + detail};
}

Outcome area_accounting() {
  FlowConfig config;
  for (const auto& [offset, t] : kTable1Codes) config.fixed_codes[offset] = t;
  config.candidate_t = {42};
  const Report report = run_flow(config);
  std::ostringstream table;
  write_table1_csv(report, table);
  const std::vector<std::string> expected = {"100,255,47,42,765,264,61403,61667,", "150,255,91,25,510,176,40723,40899,",
                                             "200,255,131,18,255,88,31428,31516,", "250,255,155,13,255,88,24835,24923,",
                                             "300,255,171,11,255,88,21602,21690,"};
  std::istringstream lines(table.str());
  std::string line;
  std::getline(lines, line);
  int matched = 0;
  std::string detail;
  for (const std::string& prefix : expected) {
    if (!std::getline(lines, line)) break;
    if (line.rfind(prefix, 0) == 0) {
      ++matched;
    } else {
      detail += " got '" + line + "'";
    }
  }
  return {matched == 5, std::to_string(matched) + "/5 rows match cells, cell area and total" + detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome property_suites() {
  std::vector<std::string> failures;

  // misread_probability: decreasing in offset and chips, increasing in sigma_err.
  bool misread = true;
  for (double s : {0.0, 50.0, 200.0, 400.0}) {
    for (int c : {1, 4, 16}) {
      double prev = 2.0;
      for (double d = 10; d <= 300; d += 10) {
        const double p = misread_probability(d, 30.0, {s, c});
        misread = misread && p <= prev;
        prev = p;
      }
    }
  }
  for (double d : {50.0, 100.0, 200.0}) {
    double prev = -1.0;
    for (double s = 0; s <= 400; s += 25) {
      const double p = misread_probability(d, 30.0, {s, 1});
      misread = misread && p >= prev;
      prev = p;
    }
    prev = 2.0;
    for (int c = 1; c <= 30; ++c) {
      const double p = misread_probability(d, 30.0, {200.0, c});
      misread = misread && p <= prev;
      prev = p;
    }
  }
  misread = misread && misread_probability(100, 30, {200, 1}) > misread_probability(100, 30, {200, 2}) &&
            misread_probability(100, 30, {100, 1}) < misread_probability(100, 30, {200, 1}) &&
            misread_probability(150, 30, {200, 1}) < misread_probability(100, 30, {200, 1});
  if (!misread) failures.push_back("misread monotonicity");

  bool contraction = true;
  for (double p = 0.001; p < 0.5; p += 0.007) {
    double prev = p;
    for (int r = 3; r <= 15; r += 2) {
      const double v = majority_vote(p, r);
      contraction = contraction && v < prev;
      prev = v;
    }
  }
  if (!contraction) failures.push_back("majority-vote contraction");

  std::string fit_detail;
  bool recovery = true;
  const MaesModel truths[] = {{0.5, 1.0}, {1.0, 2.0}, {0.8, 2.5}, {1.5, 3.0}};
  int index = 0;
  for (const MaesModel& truth : truths) {
    Rng rng = Rng(42).stream(800 + index++);
    const auto sample = sample_pe(truth, 10000, rng);
    const FitReport f = fit(sample, 0);
    const double e1 = std::abs(f.model.lambda1 / truth.lambda1 - 1.0);
    const double e2 = std::abs(f.model.lambda2 / truth.lambda2 - 1.0);
    recovery = recovery && e1 <= 0.10 && e2 <= 0.10;
    fit_detail = std::max(fit_detail, fixed(std::max(e1, e2) * 100.0, 2));
  }
  if (!recovery) failures.push_back("fit recovery");

  FlowConfig config;
  const fs::path root = fs::temp_directory_path() / "tvkey_acceptance";
  fs::remove_all(root);
  emit_reports(run_flow(config), root / "a");
  emit_reports(run_flow(config), root / "b");
  config.workers = 3;
  emit_reports(run_flow(config), root / "w");
  std::size_t files = 0;
  bool identical = true;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    ++files;
    const std::string a = slurp(entry.path());
    identical = identical && fs::exists(root / "b" / name) && a == slurp(root / "b" / name) &&
                fs::exists(root / "w" / name) && a == slurp(root / "w" / name);
  }
  fs::remove_all(root);
  if (!identical || files == 0) failures.push_back("determinism");

  std::string detail = failures.empty() ? "all suites hold" : "failed:";
  for (const auto& f : failures) detail += " " + f;
  detail += "; worst fit error " + fit_detail + "%; " + std::to_string(files) + " report files identical across reruns and workers";
  return {failures.empty(), detail};
}

std::set<int> parse_known(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const std::string prefix = "--known-failures=";
    if (arg.rfind(prefix, 0) != 0) continue;
    std::stringstream list(arg.substr(prefix.size()));
    std::string item;
    while (std::getline(list, item, ',')) {
      if (!item.empty()) known.insert(std::stoi(item));
    }
  }
  return known;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<int> known = parse_known(argc, argv);
  const std::vector<Criterion> criteria = {
      {1, "closed-form attacker success vs reference table", 1.0, table1_attack},
      {2, "multi-chip worked example", 1.0, multi_chip_example},
      {3, "Poisson-binomial CDF correctness", 30.0, poisson_binomial},
      {4, "BCH codec round trips and parameters", 120.0, bch_codec},
      {5, "calibrated reliability pairings", 600.0, calibrated_pairings},
      {6, "closed-form vs end-to-end attack", 300.0, closed_form_vs_empirical},
      {7, "area accounting", 10.0, area_accounting},
      {8, "property suites", 600.0, property_suites},
  };

  std::set<int> failed;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) failed.insert(c.id);
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " | " << o.detail << " | "
              << fixed(elapsed, 2) << " s (budget " << fixed(c.budget_s, 0) << " s" << (in_time ? "" : ", exceeded")
              << ")" << std::endl;
  }

  std::cout << criteria.size() - failed.size() << "/" << criteria.size() << " criteria pass";
  if (!known.empty()) {
    std::cout << "; known failures:";
    for (int k : known) std::cout << ' ' << k;
  }
  std::cout << std::endl;
  return failed == known ? 0 : 1;
}
