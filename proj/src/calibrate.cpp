#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "parallel.hpp"
#include "streams.hpp"
#include "tvkey/cell_sim.hpp"
#include "tvkey/explorer.hpp"

namespace tvkey {

OffsetModel model_offset(const FlowConfig& config, double delta_vt_mv, double sigma_noise_mv) {
  CellPhysicalParams params;
  params.delta_vt_mv = delta_vt_mv;
  params.sigma_var_mv = config.sigma_var_mv;
  params.sigma_noise_mv = sigma_noise_mv;
  params.nmos_sensitivity = config.nmos_sensitivity;
  OffsetModel out;
  out.data = simulate_population(params, config.cells, config.trials,
                                 detail::offset_stream(config.seed, detail::StreamFamily::Population, delta_vt_mv));
  try {
    out.fit = fit(out.data);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateData) throw;
    out.fit_error = e.what();
  }
  return out;
}

namespace {

std::vector<BchCodeSpec> build_candidates(const FlowConfig& config) {
  std::vector<BchCodeSpec> codes;
  for (int t : config.candidate_t) codes.push_back(build_code(t));
  return codes;
}

int count_matches(const FlowConfig& config, const std::map<double, int>& selected) {
  int matches = 0;
  for (const auto& [offset, t] : config.calibration_targets) {
    const auto it = selected.find(offset);
    if (it != selected.end() && it->second == t) ++matches;
  }
  return matches;
}

}  // namespace

std::map<double, int> evaluate_pairings(const FlowConfig& config, double sigma_noise_mv) {
  const std::vector<BchCodeSpec> candidates = build_candidates(config);
  std::vector<std::pair<double, int>> targets(config.calibration_targets.begin(), config.calibration_targets.end());
  std::vector<int> selected(targets.size(), 0);
  detail::parallel_for(targets.size(), config.workers, [&](std::size_t i) {
    const double offset = targets[i].first;
    const OffsetModel model = model_offset(config, offset, sigma_noise_mv);
    if (!model.fit) return;
    try {
      const CodeSelection choice =
          select_minimal_code(model.fit->model, config.key_bits, config.criterion, candidates, config.chips,
                              detail::offset_stream(config.seed, detail::StreamFamily::Chips, offset),
                              config.majority_votes);
      selected[i] = choice.code.t;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoFeasibleCode) throw;
    }
  });
  std::map<double, int> out;
  for (std::size_t i = 0; i < targets.size(); ++i) out[targets[i].first] = selected[i];
  return out;
}

CalibrationResult calibrate_noise(const FlowConfig& config) {
  config.validate();
  if (config.calibration_targets.empty()) throw Error(ErrorCode::Config, "no calibration targets");

  CalibrationResult result;
  result.targets = static_cast<int>(config.calibration_targets.size());

  auto evaluate = [&](double sigma) {
    const auto selected = evaluate_pairings(config, sigma);
    const int matches = count_matches(config, selected);
    result.evaluations.emplace_back(sigma, matches);
    return std::make_pair(matches, selected);
  };

  // Exhaustive grid.
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(
      std::floor((config.calibration_max_mv - config.calibration_min_mv) / config.calibration_step_mv + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(config.calibration_min_mv + config.calibration_step_mv * i);
  std::vector<int> matches(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) matches[i] = evaluate(grid[i]).first;

  // Best plateau: the longest run of grid points attaining the maximum, first on ties.
  const int best = *std::max_element(matches.begin(), matches.end());
  std::size_t best_begin = 0, best_len = 0;
  for (std::size_t i = 0; i < grid.size();) {
    if (matches[i] != best) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && matches[j + 1] == best) ++j;
    if (j - i + 1 > best_len) {
      best_begin = i;
      best_len = j - i + 1;
    }
    i = j + 1;
  }
  const std::size_t best_end = best_begin + best_len - 1;

  // Bisect each plateau edge against its worse neighbour.
  constexpr int kBisectionSteps = 4;
  auto refine = [&](double inside, double outside) {
    for (int k = 0; k < kBisectionSteps; ++k) {
      const double mid = 0.5 * (inside + outside);
      if (evaluate(mid).first == best) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return inside;
  };
  double low = grid[best_begin];
  double high = grid[best_end];
  if (best_begin > 0) low = refine(low, grid[best_begin - 1]);
  if (best_end + 1 < grid.size()) high = refine(high, grid[best_end + 1]);

  double chosen = 0.5 * (low + high);
  auto [chosen_matches, chosen_selected] = evaluate(chosen);
  if (chosen_matches != best) {
    // Plateau is not solid between its refined edges; keep a grid point.
    chosen = grid[best_begin + best_len / 2];
    std::tie(chosen_matches, chosen_selected) = evaluate(chosen);
  }
  result.sigma_noise_mv = chosen;
  result.matches = chosen_matches;
  result.selected_t = chosen_selected;

  constexpr int kMinimumMatches = 3;
  if (best < std::min(kMinimumMatches, result.targets)) {
    throw CalibrationError("calibration matched at most " + std::to_string(best) + " of " +
                               std::to_string(result.targets) + " reference pairings",
                           result);
  }
  return result;
}

}  // namespace tvkey
