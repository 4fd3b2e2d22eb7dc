#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tvkey/attacker.hpp"
#include "tvkey/bch.hpp"
#include "tvkey/error.hpp"
#include "tvkey/error_model.hpp"
#include "tvkey/random.hpp"
#include "tvkey/reliability.hpp"

namespace tvkey {

inline constexpr std::string_view kVersion = "1.0.0";

/// Decoder areas (um^2) of the 45nm reference designs, keyed by t. Carried as
/// provided constants; decoders are not synthesized here.
std::map<int, double> reference_decoder_areas();

/// Reference offset (mV) to t pairings that noise calibration aims to reproduce.
std::map<double, int> reference_pairings();

struct FlowConfig {
  std::vector<double> offsets_mv{100, 150, 200, 250, 300};
  double sigma_var_mv = 30.0;
  double sigma_noise_mv = 40.0;
  /// Run calibrate_noise first and use its sigma_noise.
  bool calibrate = false;
  double nmos_sensitivity = 0.6;
  std::size_t key_bits = 128;
  ReliabilityCriterion criterion;
  std::vector<double> sigma_err_mv{200.0};
  std::vector<int> attack_chips{1};
  std::vector<int> candidate_t{11, 13, 18, 25, 42};
  std::uint64_t seed = 42;
  double cell_area_um2 = 0.345;
  std::map<int, double> decoder_area_um2 = reference_decoder_areas();

  std::size_t cells = 512;
  std::uint32_t trials = 300;
  std::size_t chips = kDefaultChips;
  int majority_votes = 1;
  /// Offsets listed here use the given t instead of code selection.
  std::map<double, int> fixed_codes;

  std::map<double, int> calibration_targets = reference_pairings();
  double calibration_min_mv = 5.0;
  double calibration_max_mv = 120.0;
  double calibration_step_mv = 1.0;

  double tradeoff_delta_vt_mv = 200.0;
  double tradeoff_sigma_err_mv = 100.0;
  /// Empty: the selected code at the tradeoff offset, then every weaker distinct code.
  std::vector<int> tradeoff_t;
  int c_max = 20;

  unsigned workers = 1;

  void validate() const;
};

/// Applies one `key = value` setting. Throws Error(Config) on unknown keys or bad values.
void apply_setting(FlowConfig& config, std::string_view key, std::string_view value);
/// One `key = value` per line; `#` starts a comment.
void parse_config(FlowConfig& config, std::istream& in);
FlowConfig load_config(const std::filesystem::path& path);
std::vector<std::string> config_keys();

struct CalibrationResult {
  double sigma_noise_mv = 0.0;
  int matches = 0;
  int targets = 0;
  /// (sigma_noise, match count) over the exhaustive grid, then bisection probes.
  std::vector<std::pair<double, int>> evaluations;
  /// Selected t per target offset at the returned sigma; 0 when nothing was feasible.
  std::map<double, int> selected_t;
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, CalibrationResult best)
      : Error(ErrorCode::CalibrationFailed, what), best_(std::move(best)) {}
  const CalibrationResult& best() const { return best_; }

 private:
  CalibrationResult best_;
};

/// Selected t at each calibration target for one sigma_noise (0 = none feasible).
std::map<double, int> evaluate_pairings(const FlowConfig& config, double sigma_noise_mv);

/// Exhaustive grid over [calibration_min_mv, calibration_max_mv], then bisection
/// on the edges of the best plateau; returns the plateau midpoint. Throws
/// CalibrationError (holding the best result) if fewer than 3 pairings match
/// anywhere.
CalibrationResult calibrate_noise(const FlowConfig& config);

/// Simulated cell population and its fit at one offset, on the flow's streams.
struct OffsetModel {
  EmpiricalErrorData data;
  std::optional<FitReport> fit;
  std::string fit_error;
};
OffsetModel model_offset(const FlowConfig& config, double delta_vt_mv, double sigma_noise_mv);

struct AttackFigure {
  double sigma_err_mv;
  int chips;
  double p_rskey;
  std::uint64_t measurements;
};

struct CandidateOutcome {
  int t;
  int m;
  bool pass;
  double percentile_value;
};

struct DesignRecord {
  double delta_vt_mv = 0.0;
  std::optional<FitReport> fit;
  /// Empty when no candidate met the criterion (or the fit failed).
  std::optional<BchCodeSpec> code;
  bool code_fixed = false;
  std::string note;
  std::size_t cells = 0;
  double cell_area_um2 = 0.0;
  double decoder_area_um2 = 0.0;
  double total_area_um2 = 0.0;
  bool decoder_area_known = false;
  double criterion_percentile = 0.0;
  bool criterion_pass = false;
  std::vector<CandidateOutcome> candidates;
  KeyFailureDistribution distribution;
  std::vector<AttackFigure> attacks;
  std::vector<ChipCountPoint> chips_curve;
};

struct TradeoffRow {
  int t;
  double first_percentile_key_failure;
  double attacker_success;
};

struct Report {
  FlowConfig config;
  double sigma_noise_mv = 0.0;
  std::optional<CalibrationResult> calibration;
  std::vector<DesignRecord> rows;
  std::vector<TradeoffRow> tradeoff;
};

/// Area of a design point: (cells, cell area, decoder area, total).
DesignRecord area_record(const FlowConfig& config, double delta_vt_mv, const BchCodeSpec& code);

Report run_flow(const FlowConfig& config);

/// Key-failure quantile and closed-form attacker success for each t.
std::vector<TradeoffRow> tradeoff_curve(double delta_vt_mv, double sigma_err_mv, std::span<const int> t_values,
                                        const FlowConfig& config, double sigma_noise_mv);

/// t values of distinct length-255 codes from `strongest` down to 1.
std::vector<int> weaker_codes(int strongest);

struct EmpiricalRate {
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// 95% Wilson score interval.
EmpiricalRate wilson_interval(std::size_t successes, std::size_t trials);

/// Full attack on simulated silicon: random key, BCH encoding, per-chip PMOS
/// thresholds with variation, noisy per-transistor measurements averaged over
/// the attacked chips, bitwise guess, decode. Trial i uses base.stream(i).
EmpiricalRate end_to_end_attack_sim(const DesignPoint& design, const AttackerParams& attacker, std::size_t trials,
                                    const Rng& base, unsigned workers = 1);

/// Writes table1.csv, fits.csv, criterion.csv, attacks.csv, tradeoff.csv,
/// success_vs_chips.csv, keyfail_dist_<dvt>.csv, calibration.csv (when
/// calibrated) and summary.txt. Throws Error(Io) naming the failing path.
void emit_reports(const Report& report, const std::filesystem::path& out_dir);

// Individual report renderers, also used by the CLI.
void write_table1_csv(const Report& report, std::ostream& out);
void write_tradeoff_csv(std::span<const TradeoffRow> rows, std::ostream& out);
void write_summary(const Report& report, std::ostream& out);

}  // namespace tvkey
