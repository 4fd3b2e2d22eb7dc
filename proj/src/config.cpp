#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <string>

#include "tvkey/explorer.hpp"

namespace tvkey {

std::map<int, double> reference_decoder_areas() {
  return {{42, 61403.0}, {25, 40723.0}, {18, 31428.0}, {13, 24835.0}, {11, 21602.0}};
}

std::map<double, int> reference_pairings() {
  return {{100.0, 42}, {150.0, 25}, {200.0, 18}, {250.0, 13}, {300.0, 11}};
}

void FlowConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::Config, what); };
  if (offsets_mv.empty()) fail("offsets must not be empty");
  for (double o : offsets_mv) {
    if (!(o > 0.0) || !std::isfinite(o)) fail("offsets must be positive");
  }
  if (!(sigma_var_mv > 0.0)) fail("sigma_var must be positive");
  if (!(sigma_noise_mv > 0.0)) fail("sigma_noise must be positive");
  if (!(nmos_sensitivity >= 0.0 && nmos_sensitivity <= 1.0)) fail("nmos_sensitivity must lie in [0, 1]");
  if (key_bits == 0) fail("key_bits must be positive");
  criterion.validate();
  if (sigma_err_mv.empty()) fail("sigma_err must not be empty");
  for (double s : sigma_err_mv) {
    if (!(s >= 0.0)) fail("sigma_err values must be >= 0");
  }
  if (attack_chips.empty()) fail("attack_chips must not be empty");
  for (int c : attack_chips) {
    if (c < 1) fail("attack_chips values must be >= 1");
  }
  if (candidate_t.empty()) fail("candidate_t must not be empty");
  for (std::size_t i = 0; i < candidate_t.size(); ++i) {
    if (candidate_t[i] < 1 || candidate_t[i] > kBchMaxT) fail("candidate_t values must lie in 1..42");
    if (i > 0 && candidate_t[i] <= candidate_t[i - 1]) fail("candidate_t must be strictly ascending");
  }
  if (!(cell_area_um2 > 0.0)) fail("cell_area_um2 must be positive");
  if (cells == 0 || trials == 0) fail("cells and trials must be positive");
  if (chips < criterion.min_chips()) {
    fail("chips must be at least " + std::to_string(criterion.min_chips()) + " for the configured quantile");
  }
  if (majority_votes < 1 || majority_votes % 2 == 0) fail("majority_votes must be odd and >= 1");
  for (const auto& [offset, t] : fixed_codes) {
    if (t < 1 || t > kBchMaxT) fail("fixed_codes t values must lie in 1..42");
  }
  if (!(calibration_min_mv > 0.0 && calibration_max_mv >= calibration_min_mv && calibration_step_mv > 0.0)) {
    fail("calibration range is invalid");
  }
  if (!(tradeoff_delta_vt_mv > 0.0) || !(tradeoff_sigma_err_mv >= 0.0)) fail("tradeoff parameters are invalid");
  if (c_max < 1) fail("c_max must be >= 1");
  if (workers < 1) fail("workers must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::Config, "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) bad_value(key, text);
  return value;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) bad_value(key, text);
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, text);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  text = trim(text);
  if (text.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    items.push_back(trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view text, Parse parse) {
  std::vector<T> out;
  for (std::string_view item : split_list(text)) out.push_back(parse(key, item));
  return out;
}

// "a:b, c:d"
template <typename K, typename V, typename ParseK, typename ParseV>
std::map<K, V> parse_map(std::string_view key, std::string_view text, ParseK parse_k, ParseV parse_v) {
  std::map<K, V> out;
  for (std::string_view item : split_list(text)) {
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) bad_value(key, item);
    out[parse_k(key, item.substr(0, colon))] = parse_v(key, item.substr(colon + 1));
  }
  return out;
}

using Setter = std::function<void(FlowConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"offsets", [](FlowConfig& c, auto k, auto v) { c.offsets_mv = parse_list<double>(k, v, parse_double); }},
      {"sigma_var", [](FlowConfig& c, auto k, auto v) { c.sigma_var_mv = parse_double(k, v); }},
      {"sigma_noise", [](FlowConfig& c, auto k, auto v) { c.sigma_noise_mv = parse_double(k, v); }},
      {"calibrate", [](FlowConfig& c, auto k, auto v) { c.calibrate = parse_bool(k, v); }},
      {"nmos_sensitivity", [](FlowConfig& c, auto k, auto v) { c.nmos_sensitivity = parse_double(k, v); }},
      {"key_bits", [](FlowConfig& c, auto k, auto v) { c.key_bits = parse_int<std::size_t>(k, v); }},
      {"chip_quantile", [](FlowConfig& c, auto k, auto v) { c.criterion.chip_quantile = parse_double(k, v); }},
      {"max_key_failure", [](FlowConfig& c, auto k, auto v) { c.criterion.max_key_failure = parse_double(k, v); }},
      {"sigma_err", [](FlowConfig& c, auto k, auto v) { c.sigma_err_mv = parse_list<double>(k, v, parse_double); }},
      {"attack_chips", [](FlowConfig& c, auto k, auto v) { c.attack_chips = parse_list<int>(k, v, parse_int<int>); }},
      {"candidate_t", [](FlowConfig& c, auto k, auto v) { c.candidate_t = parse_list<int>(k, v, parse_int<int>); }},
      {"seed", [](FlowConfig& c, auto k, auto v) { c.seed = parse_int<std::uint64_t>(k, v); }},
      {"cell_area_um2", [](FlowConfig& c, auto k, auto v) { c.cell_area_um2 = parse_double(k, v); }},
      {"decoder_area_um2",
       [](FlowConfig& c, auto k, auto v) {
         c.decoder_area_um2 = parse_map<int, double>(k, v, parse_int<int>, parse_double);
       }},
      {"cells", [](FlowConfig& c, auto k, auto v) { c.cells = parse_int<std::size_t>(k, v); }},
      {"trials", [](FlowConfig& c, auto k, auto v) { c.trials = parse_int<std::uint32_t>(k, v); }},
      {"chips", [](FlowConfig& c, auto k, auto v) { c.chips = parse_int<std::size_t>(k, v); }},
      {"majority_votes", [](FlowConfig& c, auto k, auto v) { c.majority_votes = parse_int<int>(k, v); }},
      {"fixed_codes",
       [](FlowConfig& c, auto k, auto v) { c.fixed_codes = parse_map<double, int>(k, v, parse_double, parse_int<int>); }},
      {"calibration_targets",
       [](FlowConfig& c, auto k, auto v) {
         c.calibration_targets = parse_map<double, int>(k, v, parse_double, parse_int<int>);
       }},
      {"calibration_min", [](FlowConfig& c, auto k, auto v) { c.calibration_min_mv = parse_double(k, v); }},
      {"calibration_max", [](FlowConfig& c, auto k, auto v) { c.calibration_max_mv = parse_double(k, v); }},
      {"calibration_step", [](FlowConfig& c, auto k, auto v) { c.calibration_step_mv = parse_double(k, v); }},
      {"tradeoff_delta_vt", [](FlowConfig& c, auto k, auto v) { c.tradeoff_delta_vt_mv = parse_double(k, v); }},
      {"tradeoff_sigma_err", [](FlowConfig& c, auto k, auto v) { c.tradeoff_sigma_err_mv = parse_double(k, v); }},
      {"tradeoff_t", [](FlowConfig& c, auto k, auto v) { c.tradeoff_t = parse_list<int>(k, v, parse_int<int>); }},
      {"c_max", [](FlowConfig& c, auto k, auto v) { c.c_max = parse_int<int>(k, v); }},
      {"workers", [](FlowConfig& c, auto k, auto v) { c.workers = parse_int<unsigned>(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(FlowConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
  it->second(config, key, trim(value));
}

void parse_config(FlowConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(config, view.substr(0, eq), view.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

FlowConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path.string());
  FlowConfig config;
  parse_config(config, in);
  return config;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, setter] : setters()) keys.push_back(key);
  return keys;
}

}  // namespace tvkey
