#include "tvkey/tvkey.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "streams.hpp"
#include "tvkey/attacker.hpp"
#include "tvkey/bch.hpp"
#include "tvkey/cell_sim.hpp"
#include "tvkey/error_model.hpp"
#include "tvkey/explorer.hpp"
#include "tvkey/reliability.hpp"

struct tvk_config_s {
  tvkey::FlowConfig config;
};

struct tvk_code_s {
  tvkey::BchCodeSpec spec;
};

struct tvk_report_s {
  tvkey::Report report;
};

struct tvk_text_s {
  std::string text;
};

namespace {

thread_local std::string last_error;

tvk_status fail(tvk_status status, const std::string& message) {
  last_error = message;
  return status;
}

tvk_status to_status(tvkey::ErrorCode code) { return static_cast<tvk_status>(static_cast<int>(code)); }

template <typename Fn>
tvk_status guard(Fn&& fn) {
  try {
    return fn();
  } catch (const tvkey::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TVK_ERR_UNKNOWN, "out of memory");
  } catch (const std::exception& e) {
    return fail(TVK_ERR_UNKNOWN, e.what());
  } catch (...) {
    return fail(TVK_ERR_UNKNOWN, "unknown exception");
  }
}

#define TVK_REQUIRE(cond, status, message) \
  do {                                     \
    if (!(cond)) return fail(status, message); \
  } while (0)

tvkey::AttackerParams to_attacker(const tvk_attacker& a) { return {a.sigma_err, a.chips, a.remeasurements}; }

tvk_fit_report to_c(const tvkey::FitReport& r) {
  return {r.model.lambda1, r.model.lambda2, r.residual, r.points_used, r.points_clamped};
}

tvk_status emit_text(std::string text, tvk_text* out) {
  *out = new tvk_text_s{std::move(text)};
  return TVK_OK;
}

}  // namespace

extern "C" {

TVKEY_API const char* tvk_version(void) { return tvkey::kVersion.data(); }

TVKEY_API const char* tvk_status_name(tvk_status status) {
  switch (status) {
    case TVK_OK: return "OK";
    case TVK_ERR_INVALID_HANDLE: return "INVALID_HANDLE";
    case TVK_ERR_UNKNOWN: return "UNKNOWN";
    default: break;
  }
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= static_cast<int>(tvkey::ErrorCode::Config)) {
    return tvkey::error_code_name(static_cast<tvkey::ErrorCode>(code)).data();
  }
  return "UNKNOWN";
}

TVKEY_API const char* tvk_last_error(void) { return last_error.c_str(); }

TVKEY_API const char* tvk_text_data(tvk_text text) { return text ? text->text.c_str() : ""; }
TVKEY_API size_t tvk_text_size(tvk_text text) { return text ? text->text.size() : 0; }
TVKEY_API void tvk_text_destroy(tvk_text text) { delete text; }

TVKEY_API tvk_status tvk_config_create(tvk_config* out) {
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null output pointer");
  return guard([&] {
    *out = new tvk_config_s{};
    return TVK_OK;
  });
}

TVKEY_API void tvk_config_destroy(tvk_config config) { delete config; }

TVKEY_API tvk_status tvk_config_load(tvk_config config, const char* path) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(path, TVK_ERR_INVALID_ARGUMENT, "null path");
  return guard([&] {
    std::ifstream in(path);
    if (!in) return fail(TVK_ERR_IO, std::string("cannot open config file ") + path);
    tvkey::FlowConfig updated = config->config;
    tvkey::parse_config(updated, in);
    config->config = std::move(updated);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_config_set(tvk_config config, const char* key, const char* value) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(key && value, TVK_ERR_INVALID_ARGUMENT, "null key or value");
  return guard([&] {
    tvkey::apply_setting(config->config, key, value);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_config_validate(tvk_config config) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  return guard([&] {
    config->config.validate();
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_config_get(tvk_config config, const char* key, double* out) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(key && out, TVK_ERR_INVALID_ARGUMENT, "null key or output");
  const tvkey::FlowConfig& c = config->config;
  const std::string_view k(key);
  if (k == "sigma_var") *out = c.sigma_var_mv;
  else if (k == "sigma_noise") *out = c.sigma_noise_mv;
  else if (k == "nmos_sensitivity") *out = c.nmos_sensitivity;
  else if (k == "key_bits") *out = static_cast<double>(c.key_bits);
  else if (k == "chips") *out = static_cast<double>(c.chips);
  else if (k == "cells") *out = static_cast<double>(c.cells);
  else if (k == "trials") *out = c.trials;
  else if (k == "chip_quantile") *out = c.criterion.chip_quantile;
  else if (k == "max_key_failure") *out = c.criterion.max_key_failure;
  else if (k == "tradeoff_delta_vt") *out = c.tradeoff_delta_vt_mv;
  else if (k == "tradeoff_sigma_err") *out = c.tradeoff_sigma_err_mv;
  else if (k == "c_max") *out = c.c_max;
  else if (k == "workers") *out = c.workers;
  else if (k == "sigma_err" && !c.sigma_err_mv.empty()) *out = c.sigma_err_mv.front();
  else if (k == "attack_chips" && !c.attack_chips.empty()) *out = c.attack_chips.front();
  else return fail(TVK_ERR_CONFIG, "no scalar value for config key '" + std::string(k) + "'");
  return TVK_OK;
}

TVKEY_API tvk_status tvk_config_seed(tvk_config config, uint64_t* out) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null output");
  *out = config->config.seed;
  return TVK_OK;
}

TVKEY_API tvk_status tvk_simulate_population(double delta_vt, double sigma_var, double sigma_noise, size_t cells,
                                             uint32_t trials, uint64_t seed, double* out_probs) {
  TVK_REQUIRE(out_probs, TVK_ERR_INVALID_ARGUMENT, "null output buffer");
  return guard([&] {
    const tvkey::CellPhysicalParams params{delta_vt, sigma_var, sigma_noise};
    const auto data = tvkey::simulate_population(
        params, cells, trials, tvkey::detail::offset_stream(seed, tvkey::detail::StreamFamily::Population, delta_vt));
    std::copy(data.error_probs.begin(), data.error_probs.end(), out_probs);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_simulate_population_csv(double delta_vt, double sigma_var, double sigma_noise, size_t cells,
                                                 uint32_t trials, uint64_t seed, tvk_text* out) {
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null output pointer");
  return guard([&] {
    const tvkey::CellPhysicalParams params{delta_vt, sigma_var, sigma_noise};
    const auto data = tvkey::simulate_population(
        params, cells, trials, tvkey::detail::offset_stream(seed, tvkey::detail::StreamFamily::Population, delta_vt));
    std::ostringstream csv;
    tvkey::write_csv(data, csv);
    return emit_text(csv.str(), out);
  });
}

TVKEY_API tvk_status tvk_fit(const double* probs, size_t count, uint32_t trials, tvk_fit_report* out) {
  TVK_REQUIRE(probs && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = to_c(tvkey::fit(std::span<const double>(probs, count), trials));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_cdf_pe(double lambda1, double lambda2, double x, double* out) {
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    const tvkey::MaesModel model{lambda1, lambda2};
    model.validate();
    *out = tvkey::cdf_pe(model, x);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_sample_pe(double lambda1, double lambda2, size_t count, uint64_t seed, double* out) {
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    tvkey::Rng rng(seed);
    const auto samples = tvkey::sample_pe({lambda1, lambda2}, count, rng);
    std::copy(samples.begin(), samples.end(), out);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_code_build(int t, tvk_code* out) {
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null output pointer");
  return guard([&] {
    *out = new tvk_code_s{tvkey::build_code(t)};
    return TVK_OK;
  });
}

TVKEY_API void tvk_code_destroy(tvk_code code) { delete code; }

TVKEY_API tvk_status tvk_code_params(tvk_code code, int* n, int* m, int* t) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  if (n) *n = code->spec.n;
  if (m) *m = code->spec.m;
  if (t) *t = code->spec.t;
  return TVK_OK;
}

TVKEY_API tvk_status tvk_code_encode(tvk_code code, const uint8_t* message, size_t message_len, uint8_t* block,
                                     size_t block_len) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(message && block, TVK_ERR_INVALID_ARGUMENT, "null buffer");
  TVK_REQUIRE(block_len == static_cast<size_t>(code->spec.n), TVK_ERR_LENGTH_MISMATCH, "block buffer must hold n bits");
  return guard([&] {
    const auto encoded = tvkey::encode(code->spec, std::span<const uint8_t>(message, message_len));
    std::copy(encoded.begin(), encoded.end(), block);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_code_decode(tvk_code code, const uint8_t* block, size_t block_len, uint8_t* message,
                                     size_t message_len, int* corrected) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(block && message, TVK_ERR_INVALID_ARGUMENT, "null buffer");
  TVK_REQUIRE(message_len == static_cast<size_t>(code->spec.m), TVK_ERR_LENGTH_MISMATCH,
              "message buffer must hold m bits");
  return guard([&] {
    const auto result = tvkey::decode(code->spec, std::span<const uint8_t>(block, block_len));
    if (!result.ok()) return fail(TVK_ERR_DECODE_FAILURE, "uncorrectable error pattern");
    std::copy(result.message->begin(), result.message->end(), message);
    if (corrected) *corrected = result.corrected;
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_bits_to_hex(const uint8_t* bits, size_t len, tvk_text* out) {
  TVK_REQUIRE(bits && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] { return emit_text(tvkey::to_hex(std::span<const uint8_t>(bits, len)), out); });
}

TVKEY_API tvk_status tvk_poisson_binomial_cdf(int t, const double* pe, size_t n, double* out) {
  TVK_REQUIRE(pe && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::poisson_binomial_cdf(t, std::span<const double>(pe, n));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_poisson_binomial_cdf_dp(int t, const double* pe, size_t n, double* out) {
  TVK_REQUIRE(pe && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::poisson_binomial_cdf_dp(t, std::span<const double>(pe, n));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_block_failure(int t, const double* pe, size_t n, double* out) {
  TVK_REQUIRE(pe && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::block_failure(t, std::span<const double>(pe, n));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_key_failure(const double* block_failures, size_t count, double* out) {
  TVK_REQUIRE(block_failures && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::key_failure(std::span<const double>(block_failures, count));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_majority_vote(double pe, int r, double* out) {
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::majority_vote(pe, r);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_select_code(tvk_config config, double delta_vt, tvk_selection* out,
                                     tvk_fit_report* fit_out) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    const tvkey::FlowConfig& cfg = config->config;
    cfg.validate();
    const tvkey::OffsetModel model = tvkey::model_offset(cfg, delta_vt, cfg.sigma_noise_mv);
    if (!model.fit) return fail(TVK_ERR_DEGENERATE_DATA, model.fit_error);
    if (fit_out) *fit_out = to_c(*model.fit);
    std::vector<tvkey::BchCodeSpec> candidates;
    for (int t : cfg.candidate_t) candidates.push_back(tvkey::build_code(t));
    const auto choice = tvkey::select_minimal_code(
        model.fit->model, cfg.key_bits, cfg.criterion, candidates, cfg.chips,
        tvkey::detail::offset_stream(cfg.seed, tvkey::detail::StreamFamily::Chips, delta_vt), cfg.majority_votes);
    *out = {choice.code.n, choice.code.m, choice.code.t, choice.criterion.percentile_value};
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_key_failure_distribution_csv(double lambda1, double lambda2, tvk_code code, size_t key_bits,
                                                      size_t chips, uint64_t seed, tvk_text* out) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    const auto dist = tvkey::key_failure_distribution({lambda1, lambda2}, code->spec, key_bits, chips, tvkey::Rng(seed));
    std::ostringstream csv;
    csv << "chip_index,key_failure_prob\n";
    csv.precision(6);
    csv << std::scientific;
    for (size_t i = 0; i < dist.samples.size(); ++i) csv << i << ',' << dist.samples[i] << '\n';
    return emit_text(csv.str(), out);
  });
}

TVKEY_API tvk_status tvk_misread_probability(double delta_vt, double sigma_var, const tvk_attacker* attacker,
                                             double* out) {
  TVK_REQUIRE(attacker && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::misread_probability(delta_vt, sigma_var, to_attacker(*attacker));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_block_read_success(tvk_code code, double p_re, double* out) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::block_read_success(code->spec, p_re);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_key_read_success(double delta_vt, double sigma_var, tvk_code code, size_t key_bits,
                                          const tvk_attacker* attacker, double* out) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(attacker && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = tvkey::key_read_success({delta_vt, code->spec, key_bits, sigma_var}, to_attacker(*attacker));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_measurement_cost(tvk_code code, size_t key_bits, const tvk_attacker* attacker,
                                          uint64_t* out) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(attacker && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    // The count does not depend on the offset; any valid one will do.
    *out = tvkey::measurement_cost({1.0, code->spec, key_bits, 0.0}, to_attacker(*attacker));
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_success_vs_chips_csv(double delta_vt, double sigma_var, tvk_code code, size_t key_bits,
                                              double sigma_err, int c_max, tvk_text* out) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    const auto curve = tvkey::success_vs_chips({delta_vt, code->spec, key_bits, sigma_var}, sigma_err, c_max);
    std::ostringstream csv;
    csv << "C,p_rskey\n";
    csv.precision(6);
    csv << std::scientific;
    for (const auto& point : curve) csv << point.chips << ',' << point.p_rskey << '\n';
    return emit_text(csv.str(), out);
  });
}

TVKEY_API tvk_status tvk_e2e_attack(double delta_vt, double sigma_var, tvk_code code, size_t key_bits,
                                    const tvk_attacker* attacker, size_t trials, uint64_t seed, unsigned workers,
                                    tvk_rate* out) {
  TVK_REQUIRE(code, TVK_ERR_INVALID_HANDLE, "null code handle");
  TVK_REQUIRE(attacker && out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    const auto rate = tvkey::end_to_end_attack_sim(
        {delta_vt, code->spec, key_bits, sigma_var}, to_attacker(*attacker), trials,
        tvkey::detail::offset_stream(seed, tvkey::detail::StreamFamily::Attack, delta_vt), workers);
    *out = {rate.trials, rate.successes, rate.rate, rate.ci_low, rate.ci_high};
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_calibrate(tvk_config config, tvk_calibration* out) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    try {
      const auto result = tvkey::calibrate_noise(config->config);
      *out = {result.sigma_noise_mv, result.matches, result.targets};
      return TVK_OK;
    } catch (const tvkey::CalibrationError& e) {
      *out = {e.best().sigma_noise_mv, e.best().matches, e.best().targets};
      return fail(TVK_ERR_CALIBRATION_FAILED, e.what());
    }
  });
}

TVKEY_API tvk_status tvk_flow_run(tvk_config config, tvk_report* out) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    *out = new tvk_report_s{tvkey::run_flow(config->config)};
    return TVK_OK;
  });
}

TVKEY_API void tvk_report_destroy(tvk_report report) { delete report; }

TVKEY_API tvk_status tvk_report_emit(tvk_report report, const char* out_dir) {
  TVK_REQUIRE(report, TVK_ERR_INVALID_HANDLE, "null report handle");
  TVK_REQUIRE(out_dir, TVK_ERR_INVALID_ARGUMENT, "null path");
  return guard([&] {
    tvkey::emit_reports(report->report, out_dir);
    return TVK_OK;
  });
}

TVKEY_API tvk_status tvk_report_table1(tvk_report report, tvk_text* out) {
  TVK_REQUIRE(report, TVK_ERR_INVALID_HANDLE, "null report handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    std::ostringstream csv;
    tvkey::write_table1_csv(report->report, csv);
    return emit_text(csv.str(), out);
  });
}

TVKEY_API tvk_status tvk_report_summary(tvk_report report, tvk_text* out) {
  TVK_REQUIRE(report, TVK_ERR_INVALID_HANDLE, "null report handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  return guard([&] {
    std::ostringstream text;
    tvkey::write_summary(report->report, text);
    return emit_text(text.str(), out);
  });
}

TVKEY_API tvk_status tvk_tradeoff_csv(tvk_config config, double delta_vt, double sigma_err, const int* t_values,
                                      size_t count, tvk_text* out) {
  TVK_REQUIRE(config, TVK_ERR_INVALID_HANDLE, "null config handle");
  TVK_REQUIRE(out, TVK_ERR_INVALID_ARGUMENT, "null pointer");
  TVK_REQUIRE(t_values || count == 0, TVK_ERR_INVALID_ARGUMENT, "null t_values with nonzero count");
  return guard([&] {
    const tvkey::FlowConfig& cfg = config->config;
    cfg.validate();
    std::vector<int> ts(t_values, t_values + count);
    if (ts.empty()) {
      tvk_selection selection{};
      const tvk_status status = tvk_select_code(config, delta_vt, &selection, nullptr);
      if (status != TVK_OK) return status;
      ts = tvkey::weaker_codes(selection.t);
    }
    const auto rows = tvkey::tradeoff_curve(delta_vt, sigma_err, ts, cfg, cfg.sigma_noise_mv);
    std::ostringstream csv;
    tvkey::write_tradeoff_csv(rows, csv);
    return emit_text(csv.str(), out);
  });
}

}  // extern "C"
