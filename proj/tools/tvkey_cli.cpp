// tvkey command-line front end. Everything goes through the C interface.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tvkey/tvkey.h"

namespace {

struct Failure {
  tvk_status status;
  std::string message;
};

void check(tvk_status status) {
  if (status != TVK_OK) throw Failure{status, tvk_last_error()};
}

void usage_error(const std::string& message) { throw Failure{TVK_ERR_INVALID_ARGUMENT, message}; }

// Owning wrappers for the opaque handles.
class Config {
 public:
  Config() { check(tvk_config_create(&handle_)); }
  ~Config() { tvk_config_destroy(handle_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  tvk_config get() const { return handle_; }
  void set(const std::string& key, const std::string& value) { check(tvk_config_set(handle_, key.c_str(), value.c_str())); }
  double value(const char* key) const {
    double v = 0.0;
    check(tvk_config_get(handle_, key, &v));
    return v;
  }
  std::uint64_t seed() const {
    std::uint64_t s = 0;
    check(tvk_config_seed(handle_, &s));
    return s;
  }

 private:
  tvk_config handle_ = nullptr;
};

class Code {
 public:
  explicit Code(int t) {
    check(tvk_code_build(t, &handle_));
    check(tvk_code_params(handle_, &n, &m, &this->t));
  }
  ~Code() { tvk_code_destroy(handle_); }
  Code(const Code&) = delete;
  Code& operator=(const Code&) = delete;
  tvk_code get() const { return handle_; }
  std::size_t cells(std::size_t key_bits) const {
    return static_cast<std::size_t>(n) * ((key_bits + static_cast<std::size_t>(m) - 1) / static_cast<std::size_t>(m));
  }
  int n = 0, m = 0, t = 0;

 private:
  tvk_code handle_ = nullptr;
};

class Text {
 public:
  Text() = default;
  ~Text() { tvk_text_destroy(handle_); }
  Text(const Text&) = delete;
  Text& operator=(const Text&) = delete;
  tvk_text* out() { return &handle_; }
  std::string str() const { return {tvk_text_data(handle_), tvk_text_size(handle_)}; }

 private:
  tvk_text handle_ = nullptr;
};

class ReportHandle {
 public:
  ReportHandle() = default;
  ~ReportHandle() { tvk_report_destroy(handle_); }
  ReportHandle(const ReportHandle&) = delete;
  ReportHandle& operator=(const ReportHandle&) = delete;
  tvk_report* out() { return &handle_; }
  tvk_report get() const { return handle_; }

 private:
  tvk_report handle_ = nullptr;
};

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string num(double v) {
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{TVK_ERR_IO, "cannot open " + path + " for writing"};
  out << text;
  out.close();
  if (!out) throw Failure{TVK_ERR_IO, "failed writing " + path};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{TVK_ERR_IO, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads the error_prob column of a `cell_index,error_prob` file.
std::vector<double> read_error_probs(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<double> probs;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.find("error_prob") != std::string::npos) continue;
    const auto comma = line.rfind(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') {
      throw Failure{TVK_ERR_INVALID_ARGUMENT, path + ":" + std::to_string(line_no) + ": not a number: " + field};
    }
    probs.push_back(v);
  }
  return probs;
}

struct Common {
  std::string config_path;
  std::vector<std::string> settings;
  std::uint64_t seed = 42;
  bool seed_given = false;
};

void configure(Config& config, const Common& common) {
  if (!common.config_path.empty()) check(tvk_config_load(config.get(), common.config_path.c_str()));
  for (const std::string& setting : common.settings) {
    const auto eq = setting.find('=');
    if (eq == std::string::npos) usage_error("--set expects key=value, got '" + setting + "'");
    config.set(setting.substr(0, eq), setting.substr(eq + 1));
  }
  if (common.seed_given) config.set("seed", std::to_string(common.seed));
  check(tvk_config_validate(config.get()));
}

template <typename T>
void override_if(Config& config, const CLI::Option* option, const char* key, const T& value) {
  if (option->count() > 0) config.set(key, num(static_cast<double>(value)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold-voltage-biased key cells: reliability and readout-attack design explorer"};
  app.set_version_flag("--version", std::string(tvk_version()));
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", common.settings, "override one setting, key=value (repeatable)");
  auto* seed_opt = app.add_option("--seed", common.seed, "master seed")->default_val(42);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "simulate a cell population, print cell_index,error_prob");
  double sim_delta = 200.0;
  std::string sim_out;
  simulate->add_option("--delta-vt", sim_delta, "threshold offset (mV)")->default_val(200.0);
  auto* sim_sigma_noise = simulate->add_option("--sigma-noise", "noise std (mV); default from config");
  auto* sim_cells = simulate->add_option("--cells", "number of cells");
  auto* sim_trials = simulate->add_option("--trials", "power-ups per cell");
  simulate->add_option("-o,--out", sim_out, "output file (default stdout)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit lambda1, lambda2 to error probabilities");
  std::string fit_input;
  double fit_delta = 200.0;
  unsigned fit_trials_in = 0;
  fit->add_option("--input", fit_input, "cell_index,error_prob file; omitted: simulate at --delta-vt");
  fit->add_option("--delta-vt", fit_delta, "threshold offset (mV)")->default_val(200.0);
  auto* fit_trials = fit->add_option("--trials", fit_trials_in, "power-ups per cell behind --input (0: unquantized)");

  // select-code
  auto* select = app.add_subcommand("select-code", "pick the minimal BCH code meeting the reliability criterion");
  double sel_delta = 200.0;
  std::string sel_dist_out;
  select->add_option("--delta-vt", sel_delta, "threshold offset (mV)")->default_val(200.0);
  auto* sel_sigma_noise = select->add_option("--sigma-noise", "noise std (mV)");
  auto* sel_chips = select->add_option("--chips", "simulated chips per distribution");
  select->add_option("--dist-out", sel_dist_out, "write chip_index,key_failure_prob for the selected code");

  // attack
  auto* attack = app.add_subcommand("attack", "closed-form key readout success");
  std::vector<double> atk_delta;
  std::vector<int> atk_t;
  int atk_chips = 1, atk_remeasure = 1, atk_cmax = 0;
  double atk_sigma_err = 200.0;
  bool atk_cost = false;
  attack->add_option("--delta-vt", atk_delta, "offsets (mV); default the reference design points")->delimiter(',');
  attack->add_option("--t", atk_t, "code t per offset (same count as --delta-vt)")->delimiter(',');
  attack->add_option("--sigma-err", atk_sigma_err, "measurement error std (mV)")->default_val(200.0);
  attack->add_option("--chips", atk_chips, "chips measured and averaged")->default_val(1)->check(CLI::PositiveNumber);
  attack->add_option("--remeasure", atk_remeasure, "repeated measurements per chip")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  attack->add_option("--curve", atk_cmax, "print C,p_rskey for C = 1..N instead (single design point)");
  attack->add_flag("--cost", atk_cost, "append the measurement count per design point");

  // flow
  auto* flow = app.add_subcommand("flow", "run the full design flow and write reports");
  std::string flow_out = "reports";
  bool flow_calibrate = false;
  flow->add_option("-o,--out", flow_out, "report directory")->default_val("reports");
  flow->add_flag("--calibrate", flow_calibrate, "calibrate sigma_noise against the reference pairings first");
  auto* flow_workers = flow->add_option("--workers", "worker threads");

  // calibrate (part of flow, exposed for inspection)
  auto* calibrate = app.add_subcommand("calibrate", "search sigma_noise that reproduces the reference pairings");

  // tradeoff
  auto* tradeoff = app.add_subcommand("tradeoff", "key failure vs attacker success across code strengths");
  auto* tr_delta = tradeoff->add_option("--delta-vt", "threshold offset (mV); default from config");
  auto* tr_sigma_err = tradeoff->add_option("--sigma-err", "measurement error std (mV); default from config");
  std::vector<int> tr_t;
  tradeoff->add_option("--t", tr_t, "t values (default: selected code and every weaker one)")->delimiter(',');
  std::string tr_out;
  tradeoff->add_option("-o,--out", tr_out, "output file (default stdout)");

  // e2e
  auto* e2e = app.add_subcommand("e2e", "Monte Carlo end-to-end key readout attack");
  double e2e_delta = 100.0, e2e_sigma_err = 200.0;
  int e2e_t = 42, e2e_chips = 1, e2e_remeasure = 1;
  std::size_t e2e_trials = 10000;
  unsigned e2e_workers = 1;
  e2e->add_option("--delta-vt", e2e_delta, "threshold offset (mV)")->default_val(100.0);
  e2e->add_option("--t", e2e_t, "code t")->default_val(42);
  e2e->add_option("--sigma-err", e2e_sigma_err, "measurement error std (mV)")->default_val(200.0);
  e2e->add_option("--chips", e2e_chips, "chips measured and averaged")->default_val(1);
  e2e->add_option("--remeasure", e2e_remeasure, "repeated measurements per chip")->default_val(1);
  e2e->add_option("--trials", e2e_trials, "attack trials (>= 1000)")->default_val(10000);
  e2e->add_option("--workers", e2e_workers, "worker threads")->default_val(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error code=INVALID_ARGUMENT message=\"" << e.what() << "\"\n";
    return 2;
  }
  common.seed_given = seed_opt->count() > 0;

  try {
    Config config;
    configure(config, common);
    const double sigma_var = config.value("sigma_var");
    const auto key_bits = static_cast<std::size_t>(config.value("key_bits"));

    if (simulate->parsed()) {
      override_if(config, sim_sigma_noise, "sigma_noise", sim_sigma_noise->as<double>());
      override_if(config, sim_cells, "cells", sim_cells->as<double>());
      override_if(config, sim_trials, "trials", sim_trials->as<double>());
      Text csv;
      check(tvk_simulate_population_csv(sim_delta, sigma_var, config.value("sigma_noise"),
                                        static_cast<std::size_t>(config.value("cells")),
                                        static_cast<std::uint32_t>(config.value("trials")), config.seed(), csv.out()));
      write_output(sim_out, csv.str());
    } else if (fit->parsed()) {
      std::vector<double> probs;
      std::uint32_t trials = 0;
      if (!fit_input.empty()) {
        probs = read_error_probs(fit_input);
        trials = fit_trials->count() > 0 ? fit_trials_in : 0;
      } else {
        probs.resize(static_cast<std::size_t>(config.value("cells")));
        trials = static_cast<std::uint32_t>(config.value("trials"));
        check(tvk_simulate_population(fit_delta, sigma_var, config.value("sigma_noise"), probs.size(), trials,
                                      config.seed(), probs.data()));
      }
      tvk_fit_report report{};
      check(tvk_fit(probs.data(), probs.size(), trials, &report));
      std::cout << "delta_vt,lambda1,lambda2,residual\n"
                << num(fit_delta) << ',' << num(report.lambda1) << ',' << num(report.lambda2) << ','
                << num(report.residual) << '\n';
    } else if (select->parsed()) {
      override_if(config, sel_sigma_noise, "sigma_noise", sel_sigma_noise->as<double>());
      override_if(config, sel_chips, "chips", sel_chips->as<double>());
      check(tvk_config_validate(config.get()));
      tvk_selection selection{};
      tvk_fit_report fit_report{};
      check(tvk_select_code(config.get(), sel_delta, &selection, &fit_report));
      std::cout << "delta_vt,n,m,t,lambda1,lambda2,percentile_value\n"
                << num(sel_delta) << ',' << selection.n << ',' << selection.m << ',' << selection.t << ','
                << num(fit_report.lambda1) << ',' << num(fit_report.lambda2) << ','
                << sci(selection.percentile_value) << '\n';
      if (!sel_dist_out.empty()) {
        Code code(selection.t);
        Text csv;
        check(tvk_key_failure_distribution_csv(fit_report.lambda1, fit_report.lambda2, code.get(), key_bits,
                                               static_cast<std::size_t>(config.value("chips")), config.seed(),
                                               csv.out()));
        write_output(sel_dist_out, csv.str());
      }
    } else if (attack->parsed()) {
      if (atk_delta.empty()) {
        atk_delta = {100, 150, 200, 250, 300};
        if (atk_t.empty()) atk_t = {42, 25, 18, 13, 11};
      }
      if (atk_t.size() != atk_delta.size()) usage_error("--t needs one value per --delta-vt");
      const tvk_attacker attacker{atk_sigma_err, atk_chips, atk_remeasure};
      if (atk_cmax > 0) {
        if (atk_delta.size() != 1) usage_error("--curve takes a single design point");
        Code code(atk_t.front());
        Text csv;
        check(tvk_success_vs_chips_csv(atk_delta.front(), sigma_var, code.get(), key_bits, atk_sigma_err, atk_cmax,
                                       csv.out()));
        std::cout << csv.str();
      } else {
        std::cout << "delta_vt,n,m,t,cells,p_rskey" << (atk_cost ? ",measurements" : "") << '\n';
        for (std::size_t i = 0; i < atk_delta.size(); ++i) {
          Code code(atk_t[i]);
          double p = 0.0;
          check(tvk_key_read_success(atk_delta[i], sigma_var, code.get(), key_bits, &attacker, &p));
          std::cout << num(atk_delta[i]) << ',' << code.n << ',' << code.m << ',' << code.t << ','
                    << code.cells(key_bits) << ',' << sci(p);
          if (atk_cost) {
            std::uint64_t cost = 0;
            check(tvk_measurement_cost(code.get(), key_bits, &attacker, &cost));
            std::cout << ',' << cost;
          }
          std::cout << '\n';
        }
      }
    } else if (flow->parsed()) {
      if (flow_calibrate) config.set("calibrate", "true");
      override_if(config, flow_workers, "workers", flow_workers->as<double>());
      check(tvk_config_validate(config.get()));
      ReportHandle report;
      check(tvk_flow_run(config.get(), report.out()));
      check(tvk_report_emit(report.get(), flow_out.c_str()));
      Text summary;
      check(tvk_report_summary(report.get(), summary.out()));
      std::cout << summary.str();
    } else if (calibrate->parsed()) {
      tvk_calibration result{};
      const tvk_status status = tvk_calibrate(config.get(), &result);
      std::cout << "sigma_noise,matches,targets\n"
                << num(result.sigma_noise) << ',' << result.matches << ',' << result.targets << '\n';
      check(status);
    } else if (tradeoff->parsed()) {
      const double delta = tr_delta->count() > 0 ? tr_delta->as<double>() : config.value("tradeoff_delta_vt");
      const double sigma_err =
          tr_sigma_err->count() > 0 ? tr_sigma_err->as<double>() : config.value("tradeoff_sigma_err");
      Text csv;
      check(tvk_tradeoff_csv(config.get(), delta, sigma_err, tr_t.empty() ? nullptr : tr_t.data(), tr_t.size(),
                             csv.out()));
      write_output(tr_out, csv.str());
    } else if (e2e->parsed()) {
      Code code(e2e_t);
      const tvk_attacker attacker{e2e_sigma_err, e2e_chips, e2e_remeasure};
      tvk_rate rate{};
      check(tvk_e2e_attack(e2e_delta, sigma_var, code.get(), key_bits, &attacker, e2e_trials, config.seed(),
                           e2e_workers, &rate));
      double closed_form = 0.0;
      check(tvk_key_read_success(e2e_delta, sigma_var, code.get(), key_bits, &attacker, &closed_form));
      std::cout << "trials,successes,rate,ci_low,ci_high,closed_form\n"
                << rate.trials << ',' << rate.successes << ',' << num(rate.rate) << ',' << num(rate.ci_low) << ','
                << num(rate.ci_high) << ',' << sci(closed_form) << '\n';
    }
  } catch (const Failure& f) {
    std::string message = f.message;
    for (char& c : message) {
      if (c == '"') c = '\'';
      if (c == '\n') c = ' ';
    }
    std::cout.flush();
    std::cerr << "error code=" << tvk_status_name(f.status) << " message=\"" << message << "\"\n";
    return 1;
  }
  return 0;
}
