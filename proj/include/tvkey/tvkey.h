/*
 * C interface to the tvkey library: threshold-biased key cells, the
 * heterogeneous error-rate model, BCH(255) codes, reliability analysis and
 * invasive-readout attacker analysis.
 *
 * Every function returns a tvk_status. On failure, tvk_last_error() returns a
 * message for the calling thread that stays valid until its next failing call.
 * Handles are opaque and owned by the caller; release them with the matching
 * *_destroy function. Voltages are in mV, areas in um^2.
 */
#ifndef TVKEY_TVKEY_H
#define TVKEY_TVKEY_H

#include <stddef.h>
#include <stdint.h>

#if defined(TVKEY_BUILDING_LIBRARY)
#define TVKEY_API __attribute__((visibility("default")))
#else
#define TVKEY_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tvk_status {
  TVK_OK = 0,
  TVK_ERR_INVALID_ARGUMENT = 1,
  TVK_ERR_DEGENERATE_DATA = 2,
  TVK_ERR_UNSUPPORTED_T = 3,
  TVK_ERR_LENGTH_MISMATCH = 4,
  TVK_ERR_DECODE_FAILURE = 5,
  TVK_ERR_INSUFFICIENT_SAMPLES = 6,
  TVK_ERR_NO_FEASIBLE_CODE = 7,
  TVK_ERR_DEGENERATE_DISTRIBUTION = 8,
  TVK_ERR_CALIBRATION_FAILED = 9,
  TVK_ERR_IO = 10,
  TVK_ERR_CONFIG = 11,
  TVK_ERR_INVALID_HANDLE = 100,
  TVK_ERR_UNKNOWN = 101
} tvk_status;

typedef struct tvk_config_s* tvk_config;
typedef struct tvk_code_s* tvk_code;
typedef struct tvk_report_s* tvk_report;
typedef struct tvk_text_s* tvk_text;

typedef struct tvk_fit_report {
  double lambda1;
  double lambda2;
  double residual;
  size_t points_used;
  size_t points_clamped;
} tvk_fit_report;

typedef struct tvk_attacker {
  double sigma_err; /* measurement error std */
  int chips;        /* chip instances measured and averaged, >= 1 */
  int remeasurements; /* repeated measurements per chip, >= 1 (1 = off) */
} tvk_attacker;

typedef struct tvk_selection {
  int n;
  int m;
  int t;
  double percentile_value;
} tvk_selection;

typedef struct tvk_rate {
  size_t trials;
  size_t successes;
  double rate;
  double ci_low;
  double ci_high;
} tvk_rate;

typedef struct tvk_calibration {
  double sigma_noise;
  int matches;
  int targets;
} tvk_calibration;

TVKEY_API const char* tvk_version(void);
TVKEY_API const char* tvk_status_name(tvk_status status);
TVKEY_API const char* tvk_last_error(void);

/* Text results (CSV, summaries). */
TVKEY_API const char* tvk_text_data(tvk_text text);
TVKEY_API size_t tvk_text_size(tvk_text text);
TVKEY_API void tvk_text_destroy(tvk_text text);

/* Flow configuration: defaults, then `key = value` files and single settings. */
TVKEY_API tvk_status tvk_config_create(tvk_config* out);
TVKEY_API void tvk_config_destroy(tvk_config config);
TVKEY_API tvk_status tvk_config_load(tvk_config config, const char* path);
TVKEY_API tvk_status tvk_config_set(tvk_config config, const char* key, const char* value);
TVKEY_API tvk_status tvk_config_validate(tvk_config config);
/* Scalar settings: sigma_var, sigma_noise, nmos_sensitivity, key_bits,
 * chips, cells, trials, chip_quantile, max_key_failure, tradeoff_delta_vt,
 * tradeoff_sigma_err, c_max, workers, and sigma_err / attack_chips (first entry). */
TVKEY_API tvk_status tvk_config_get(tvk_config config, const char* key, double* out);
TVKEY_API tvk_status tvk_config_seed(tvk_config config, uint64_t* out);

/* Cell population: writes `cells` per-cell error probabilities (intended bit 1). */
TVKEY_API tvk_status tvk_simulate_population(double delta_vt, double sigma_var, double sigma_noise, size_t cells,
                                             uint32_t trials, uint64_t seed, double* out_probs);
/* Population error probabilities as `cell_index,error_prob` CSV. */
TVKEY_API tvk_status tvk_simulate_population_csv(double delta_vt, double sigma_var, double sigma_noise, size_t cells,
                                                 uint32_t trials, uint64_t seed, tvk_text* out);

/* Error-rate model. trials = 0 marks unquantized samples. */
TVKEY_API tvk_status tvk_fit(const double* probs, size_t count, uint32_t trials, tvk_fit_report* out);
TVKEY_API tvk_status tvk_cdf_pe(double lambda1, double lambda2, double x, double* out);
TVKEY_API tvk_status tvk_sample_pe(double lambda1, double lambda2, size_t count, uint64_t seed, double* out);

/* BCH codes of length 255. Bits are one per byte (0 or 1). */
TVKEY_API tvk_status tvk_code_build(int t, tvk_code* out);
TVKEY_API void tvk_code_destroy(tvk_code code);
TVKEY_API tvk_status tvk_code_params(tvk_code code, int* n, int* m, int* t);
TVKEY_API tvk_status tvk_code_encode(tvk_code code, const uint8_t* message, size_t message_len, uint8_t* block,
                                     size_t block_len);
/* Returns TVK_ERR_DECODE_FAILURE for a detected uncorrectable block. */
TVKEY_API tvk_status tvk_code_decode(tvk_code code, const uint8_t* block, size_t block_len, uint8_t* message,
                                     size_t message_len, int* corrected);
/* Hex rendering of a bit string, bit 0 most significant. */
TVKEY_API tvk_status tvk_bits_to_hex(const uint8_t* bits, size_t len, tvk_text* out);

/* Reliability. */
TVKEY_API tvk_status tvk_poisson_binomial_cdf(int t, const double* pe, size_t n, double* out);
TVKEY_API tvk_status tvk_poisson_binomial_cdf_dp(int t, const double* pe, size_t n, double* out);
TVKEY_API tvk_status tvk_block_failure(int t, const double* pe, size_t n, double* out);
TVKEY_API tvk_status tvk_key_failure(const double* block_failures, size_t count, double* out);
TVKEY_API tvk_status tvk_majority_vote(double pe, int r, double* out);
/* Simulates and fits the population at delta_vt with the configured sigma_noise,
 * then selects the minimal candidate code. fit_out may be NULL. */
TVKEY_API tvk_status tvk_select_code(tvk_config config, double delta_vt, tvk_selection* out,
                                     tvk_fit_report* fit_out);
/* `chip_index,key_failure_prob` for a model and code. */
TVKEY_API tvk_status tvk_key_failure_distribution_csv(double lambda1, double lambda2, tvk_code code, size_t key_bits,
                                                      size_t chips, uint64_t seed, tvk_text* out);

/* Attacker. */
TVKEY_API tvk_status tvk_misread_probability(double delta_vt, double sigma_var, const tvk_attacker* attacker,
                                             double* out);
TVKEY_API tvk_status tvk_block_read_success(tvk_code code, double p_re, double* out);
TVKEY_API tvk_status tvk_key_read_success(double delta_vt, double sigma_var, tvk_code code, size_t key_bits,
                                          const tvk_attacker* attacker, double* out);
TVKEY_API tvk_status tvk_measurement_cost(tvk_code code, size_t key_bits, const tvk_attacker* attacker,
                                          uint64_t* out);
/* `C,p_rskey` for C = 1..c_max. */
TVKEY_API tvk_status tvk_success_vs_chips_csv(double delta_vt, double sigma_var, tvk_code code, size_t key_bits,
                                              double sigma_err, int c_max, tvk_text* out);
TVKEY_API tvk_status tvk_e2e_attack(double delta_vt, double sigma_var, tvk_code code, size_t key_bits,
                                    const tvk_attacker* attacker, size_t trials, uint64_t seed, unsigned workers,
                                    tvk_rate* out);

/* Design flow. On TVK_ERR_CALIBRATION_FAILED, *out still holds the best result. */
TVKEY_API tvk_status tvk_calibrate(tvk_config config, tvk_calibration* out);
TVKEY_API tvk_status tvk_flow_run(tvk_config config, tvk_report* out);
TVKEY_API void tvk_report_destroy(tvk_report report);
TVKEY_API tvk_status tvk_report_emit(tvk_report report, const char* out_dir);
TVKEY_API tvk_status tvk_report_table1(tvk_report report, tvk_text* out);
TVKEY_API tvk_status tvk_report_summary(tvk_report report, tvk_text* out);
/* `t,first_percentile_key_failure,attacker_success`; t_values may be NULL
 * (count 0) to use the selected code at delta_vt and every weaker code. */
TVKEY_API tvk_status tvk_tradeoff_csv(tvk_config config, double delta_vt, double sigma_err, const int* t_values,
                                      size_t count, tvk_text* out);

#ifdef __cplusplus
}
#endif

#endif /* TVKEY_TVKEY_H */
