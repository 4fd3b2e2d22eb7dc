#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"
#include "streams.hpp"
#include "tvkey/explorer.hpp"

namespace tvkey {

DesignRecord area_record(const FlowConfig& config, double delta_vt_mv, const BchCodeSpec& code) {
  DesignRecord record;
  record.delta_vt_mv = delta_vt_mv;
  record.cells = static_cast<std::size_t>(code.n) * blocks_for_key(config.key_bits, code);
  record.cell_area_um2 = static_cast<double>(record.cells) * config.cell_area_um2;
  const auto area = config.decoder_area_um2.find(code.t);
  record.decoder_area_known = area != config.decoder_area_um2.end();
  record.decoder_area_um2 = record.decoder_area_known ? area->second : 0.0;
  record.total_area_um2 = record.cell_area_um2 + record.decoder_area_um2;
  record.code = code;
  return record;
}

std::vector<int> weaker_codes(int strongest) {
  std::vector<int> out;
  int last_m = -1;
  for (int t = strongest; t >= 1; --t) {
    const int m = build_code(t).m;
    if (m != last_m) out.push_back(t);
    last_m = m;
  }
  return out;
}

namespace {

DesignRecord evaluate_offset(const FlowConfig& config, double offset, double sigma_noise) {
  const OffsetModel model = model_offset(config, offset, sigma_noise);
  const Rng chip_base = detail::offset_stream(config.seed, detail::StreamFamily::Chips, offset);

  std::optional<BchCodeSpec> chosen;
  KeyFailureDistribution chosen_dist;
  CriterionResult chosen_result;
  std::vector<CandidateOutcome> outcomes;
  bool fixed = false;
  std::string note;

  auto distribution_for = [&](const BchCodeSpec& code) {
    return key_failure_distribution(model.fit->model, code, config.key_bits, config.chips, chip_base, 1,
                                    config.majority_votes);
  };

  if (const auto it = config.fixed_codes.find(offset); it != config.fixed_codes.end()) {
    fixed = true;
    chosen = build_code(it->second);
    if (model.fit) {
      chosen_dist = distribution_for(*chosen);
      chosen_result = check_criterion(chosen_dist, config.criterion);
      outcomes.push_back({chosen->t, chosen->m, chosen_result.pass, chosen_result.percentile_value});
    } else {
      note = "fit failed: " + model.fit_error;
    }
  } else if (!model.fit) {
    note = "fit failed: " + model.fit_error;
  } else {
    // Every candidate gets a full distribution for the report; the selection
    // rule is the one select_minimal_code applies.
    for (int t : config.candidate_t) {
      const BchCodeSpec code = build_code(t);
      KeyFailureDistribution dist = distribution_for(code);
      const CriterionResult result = check_criterion(dist, config.criterion);
      outcomes.push_back({code.t, code.m, result.pass, result.percentile_value});
      if (result.pass && !chosen) {
        chosen = code;
        chosen_dist = std::move(dist);
        chosen_result = result;
      }
    }
    if (!chosen) note = "no feasible code among candidates";
  }

  DesignRecord record;
  if (chosen) {
    record = area_record(config, offset, *chosen);
    const DesignPoint design{offset, *chosen, config.key_bits, config.sigma_var_mv};
    for (double sigma_err : config.sigma_err_mv) {
      for (int c : config.attack_chips) {
        const AttackerParams attacker{sigma_err, c};
        record.attacks.push_back(
            {sigma_err, c, key_read_success(design, attacker), measurement_cost(design, attacker)});
      }
    }
    record.chips_curve = success_vs_chips(design, config.sigma_err_mv.front(), config.c_max);
  } else {
    record.delta_vt_mv = offset;
  }
  record.fit = model.fit;
  record.code_fixed = fixed;
  record.note = note;
  record.candidates = std::move(outcomes);
  record.distribution = std::move(chosen_dist);
  record.criterion_percentile = chosen_result.percentile_value;
  record.criterion_pass = chosen_result.pass;
  return record;
}

}  // namespace

std::vector<TradeoffRow> tradeoff_curve(double delta_vt_mv, double sigma_err_mv, std::span<const int> t_values,
                                        const FlowConfig& config, double sigma_noise_mv) {
  const OffsetModel model = model_offset(config, delta_vt_mv, sigma_noise_mv);
  if (!model.fit) throw Error(ErrorCode::DegenerateData, "tradeoff: " + model.fit_error);
  const Rng chip_base = detail::offset_stream(config.seed, detail::StreamFamily::Chips, delta_vt_mv);
  std::vector<TradeoffRow> rows(t_values.size());
  detail::parallel_for(t_values.size(), config.workers, [&](std::size_t i) {
    const BchCodeSpec code = build_code(t_values[i]);
    const KeyFailureDistribution dist = key_failure_distribution(model.fit->model, code, config.key_bits,
                                                                 config.chips, chip_base, 1, config.majority_votes);
    const DesignPoint design{delta_vt_mv, code, config.key_bits, config.sigma_var_mv};
    rows[i] = {code.t, nearest_rank_quantile(dist.samples, config.criterion.chip_quantile),
               key_read_success(design, AttackerParams{sigma_err_mv, 1})};
  });
  return rows;
}

Report run_flow(const FlowConfig& config) {
  config.validate();
  Report report;
  report.config = config;
  report.sigma_noise_mv = config.sigma_noise_mv;
  if (config.calibrate) {
    report.calibration = calibrate_noise(config);
    report.sigma_noise_mv = report.calibration->sigma_noise_mv;
  }

  report.rows.resize(config.offsets_mv.size());
  detail::parallel_for(config.offsets_mv.size(), config.workers, [&](std::size_t i) {
    report.rows[i] = evaluate_offset(config, config.offsets_mv[i], report.sigma_noise_mv);
  });

  std::vector<int> t_values = config.tradeoff_t;
  if (t_values.empty()) {
    const auto row = std::find_if(report.rows.begin(), report.rows.end(), [&](const DesignRecord& r) {
      return r.delta_vt_mv == config.tradeoff_delta_vt_mv;
    });
    if (row != report.rows.end()) {
      if (row->code) t_values = weaker_codes(row->code->t);
    } else {
      const DesignRecord extra = evaluate_offset(config, config.tradeoff_delta_vt_mv, report.sigma_noise_mv);
      if (extra.code) t_values = weaker_codes(extra.code->t);
    }
  }
  if (!t_values.empty()) {
    report.tradeoff = tradeoff_curve(config.tradeoff_delta_vt_mv, config.tradeoff_sigma_err_mv, t_values, config,
                                     report.sigma_noise_mv);
  }
  return report;
}

}  // namespace tvkey
