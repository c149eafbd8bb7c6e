#pragma once

// Scenario parameters for the beam-association simulator and analysis.
//
// Everything is stored in SI linear units (watts, meters, radians, linear
// SINR).  dB values only appear at the text boundary, through keys carrying a
// `_db` / `_dbm` suffix.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmwave_ba {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
inline double dbm_to_watt(double dbm) { return db_to_linear(dbm - 30.0); }
inline double watt_to_dbm(double watt) { return linear_to_db(watt) + 30.0; }

/// Thermal noise floor (-174 dBm/Hz) over `bandwidth_hz` plus a receiver noise figure, in watts.
inline double thermal_noise_watt(double bandwidth_hz, double noise_figure_db) {
  return dbm_to_watt(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

/// Free-space path gain at 1 m, (c / (4 pi f))^2.
inline double free_space_intercept(double carrier_hz) {
  const double r = kSpeedOfLight / (4.0 * std::numbers::pi * carrier_hz);
  return r * r;
}

/// Thrown for unparsable input or an invariant violation; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class AntennaModel { kSectored, kUla };
enum class PathModel { kSinglePath, kMultipath };

/// How co-pilot interferers radiate while the typical user trains.
///  kFixedRandom: every other BS keeps one random data beam for the whole block.
///  kSynchronousSweep: every BS steps through its codebook in lock-step (beam n in its own frame).
enum class InterfererBeams { kFixedRandom, kSynchronousSweep };

struct ScenarioConfig {
  // network
  double bs_density = 1.0 / (std::numbers::pi * 50.0 * 50.0);
  double los_range = 50.0;
  double sim_window_radius = 0.0;  // 0: use sim_window_factor cell radii
  double sim_window_factor = 20.0;

  // propagation
  double alpha_los = 2.5;
  double alpha_nlos = 4.5;
  double intercept_los = free_space_intercept(28e9);
  double intercept_nlos = free_space_intercept(28e9);
  int nakagami_los = 2;
  int nakagami_nlos = 3;
  PathModel paths = PathModel::kSinglePath;
  int n_clusters = 3;

  // radio
  double tx_power = dbm_to_watt(43.0);
  double noise_power = thermal_noise_watt(100e6, 10.0);

  // antenna
  AntennaModel antenna = AntennaModel::kSectored;
  int n_bs_beams = 64;
  int n_ms_beams = 8;
  double front_to_back_constant = 0.1;
  int bs_antennas = 64;
  int ms_antennas = 8;

  // training
  double pilot_reuse = 1.0;
  int coherence_symbols = 70000;
  int wide_bs_beams = 0;        // 0: same as n_bs_beams
  int wide_ms_beams = 0;        // 0: same as n_ms_beams
  double wide_pilot_reuse = 0;  // 0: same as pilot_reuse
  InterfererBeams interferer_beams = InterfererBeams::kFixedRandom;
  bool redraw_data_beams = false;

  // link
  double sinr_threshold_min = 1.0;
  double sinr_threshold_max = std::numeric_limits<double>::infinity();

  // near-orthogonal pilots
  double interference_radius = 0.0;  // 0: derive from epsilon1/epsilon2
  double epsilon1 = 0.01;
  double epsilon2 = 0.01;

  double cell_radius() const { return 1.0 / std::sqrt(std::numbers::pi * bs_density); }
  void set_cell_radius(double r) { bs_density = 1.0 / (std::numbers::pi * r * r); }
  double window_radius() const {
    return sim_window_radius > 0.0 ? sim_window_radius : sim_window_factor * cell_radius();
  }
  int effective_wide_bs_beams() const { return wide_bs_beams > 0 ? wide_bs_beams : n_bs_beams; }
  int effective_wide_ms_beams() const { return wide_ms_beams > 0 ? wide_ms_beams : n_ms_beams; }
  double effective_wide_pilot_reuse() const { return wide_pilot_reuse > 0.0 ? wide_pilot_reuse : pilot_reuse; }

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double parse_double(const std::string& field, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "+inf" || t == "infinity" || t == "unbounded") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || t.empty()) throw ConfigError(field, "not a number: '" + text + "'");
  return v;
}

inline int parse_int(const std::string& field, const std::string& text) {
  const double v = parse_double(field, text);
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e9)
    throw ConfigError(field, "not an integer: '" + text + "'");
  return static_cast<int>(v);
}

inline bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError(field, "not a boolean: '" + text + "'");
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, ptr);
}

// Flattens a property tree into "section.sub.key" -> value.
inline void flatten(const boost::property_tree::ptree& tree, const std::string& prefix,
                    std::map<std::string, std::string>& out) {
  for (const auto& [name, child] : tree) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (child.empty()) {
      out[lower(trim(key))] = trim(child.data());
    } else {
      flatten(child, key, out);
    }
  }
}

}  // namespace detail

/// Flat "section.key" -> raw text view of a config source.
using ConfigEntries = std::map<std::string, std::string>;

/// Parses INI-style text ("key = value", "[section]" headers, dotted section names nest).
inline ConfigEntries parse_config_text(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ConfigEntries out;
  detail::flatten(tree, "", out);
  return out;
}

namespace detail {

struct FieldSpec {
  std::string key;  // canonical "section.name"
  std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)> apply;
};

inline AntennaModel parse_antenna(const std::string& key, const std::string& v) {
  const auto t = lower(v);
  if (t == "sectored") return AntennaModel::kSectored;
  if (t == "ula") return AntennaModel::kUla;
  throw ConfigError(key, "expected 'sectored' or 'ula', got '" + v + "'");
}

inline PathModel parse_paths(const std::string& key, const std::string& v) {
  const auto t = lower(v);
  if (t == "single") return PathModel::kSinglePath;
  if (t == "multipath") return PathModel::kMultipath;
  throw ConfigError(key, "expected 'single' or 'multipath', got '" + v + "'");
}

inline InterfererBeams parse_interferer_beams(const std::string& key, const std::string& v) {
  const auto t = lower(v);
  if (t == "fixed") return InterfererBeams::kFixedRandom;
  if (t == "sweep") return InterfererBeams::kSynchronousSweep;
  throw ConfigError(key, "expected 'fixed' or 'sweep', got '" + v + "'");
}

// Keys whose value is a dB quantity map onto a linear field.
inline const std::vector<FieldSpec>& field_specs() {
  using C = ScenarioConfig;
  static const std::vector<FieldSpec> specs = [] {
    std::vector<FieldSpec> s;
    auto real = [&s](std::string key, double C::*member) {
      s.push_back({key, [member](C& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); }});
    };
    auto decibel = [&s](std::string key, double C::*member, double offset) {
      s.push_back({key, [member, offset](C& c, const std::string& k, const std::string& v) {
                     c.*member = db_to_linear(parse_double(k, v) + offset);
                   }});
    };
    auto integer = [&s](std::string key, int C::*member) {
      s.push_back({key, [member](C& c, const std::string& k, const std::string& v) { c.*member = parse_int(k, v); }});
    };
    real("network.bs_density", &C::bs_density);
    s.push_back({"network.cell_radius", [](C& c, const std::string& k, const std::string& v) {
                   const double r = parse_double(k, v);
                   if (!(r > 0.0)) throw ConfigError(k, "must be > 0");
                   c.set_cell_radius(r);
                 }});
    real("network.los_range", &C::los_range);
    real("network.sim_window_radius", &C::sim_window_radius);
    real("network.sim_window_factor", &C::sim_window_factor);

    real("propagation.alpha_los", &C::alpha_los);
    real("propagation.alpha_nlos", &C::alpha_nlos);
    real("propagation.intercept_los", &C::intercept_los);
    real("propagation.intercept_nlos", &C::intercept_nlos);
    decibel("propagation.intercept_los_db", &C::intercept_los, 0.0);
    decibel("propagation.intercept_nlos_db", &C::intercept_nlos, 0.0);
    s.push_back({"propagation.carrier_frequency", [](C& c, const std::string& k, const std::string& v) {
                   const double f = parse_double(k, v);
                   if (!(f > 0.0)) throw ConfigError(k, "must be > 0");
                   c.intercept_los = c.intercept_nlos = free_space_intercept(f);
                 }});
    integer("propagation.nakagami_los", &C::nakagami_los);
    integer("propagation.nakagami_nlos", &C::nakagami_nlos);
    s.push_back({"propagation.paths",
                 [](C& c, const std::string& k, const std::string& v) { c.paths = parse_paths(k, v); }});
    integer("propagation.n_clusters", &C::n_clusters);

    real("radio.tx_power", &C::tx_power);
    decibel("radio.tx_power_dbm", &C::tx_power, -30.0);
    real("radio.noise_power", &C::noise_power);
    decibel("radio.noise_power_dbm", &C::noise_power, -30.0);

    s.push_back({"antenna.model",
                 [](C& c, const std::string& k, const std::string& v) { c.antenna = parse_antenna(k, v); }});
    integer("antenna.n_bs_beams", &C::n_bs_beams);
    integer("antenna.n_ms_beams", &C::n_ms_beams);
    real("antenna.front_to_back_constant", &C::front_to_back_constant);
    integer("antenna.bs_antennas", &C::bs_antennas);
    integer("antenna.ms_antennas", &C::ms_antennas);

    real("training.pilot_reuse", &C::pilot_reuse);
    integer("training.coherence_symbols", &C::coherence_symbols);
    integer("training.wide_bs_beams", &C::wide_bs_beams);
    integer("training.wide_ms_beams", &C::wide_ms_beams);
    real("training.wide_pilot_reuse", &C::wide_pilot_reuse);
    s.push_back({"training.interferer_beams", [](C& c, const std::string& k, const std::string& v) {
                   c.interferer_beams = parse_interferer_beams(k, v);
                 }});
    s.push_back({"training.redraw_data_beams",
                 [](C& c, const std::string& k, const std::string& v) { c.redraw_data_beams = parse_bool(k, v); }});

    real("link.sinr_threshold_min", &C::sinr_threshold_min);
    real("link.sinr_threshold_max", &C::sinr_threshold_max);
    decibel("link.sinr_threshold_min_db", &C::sinr_threshold_min, 0.0);
    decibel("link.sinr_threshold_max_db", &C::sinr_threshold_max, 0.0);

    real("near_orth.interference_radius", &C::interference_radius);
    real("near_orth.epsilon1", &C::epsilon1);
    real("near_orth.epsilon2", &C::epsilon2);
    return s;
  }();
  return specs;
}

}  // namespace detail

/// Throws ConfigError naming the first violated invariant.
inline void validate(const ScenarioConfig& c) {
  auto positive = [](const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be finite and > 0");
  };
  positive("network.bs_density", c.bs_density);
  positive("network.los_range", c.los_range);
  if (c.sim_window_radius < 0.0) throw ConfigError("network.sim_window_radius", "must be >= 0");
  positive("network.sim_window_factor", c.sim_window_factor);
  positive("propagation.alpha_los", c.alpha_los);
  positive("propagation.alpha_nlos", c.alpha_nlos);
  positive("propagation.intercept_los", c.intercept_los);
  positive("propagation.intercept_nlos", c.intercept_nlos);
  if (c.nakagami_los < 1) throw ConfigError("propagation.nakagami_los", "must be a positive integer");
  if (c.nakagami_nlos < 1) throw ConfigError("propagation.nakagami_nlos", "must be a positive integer");
  if (c.n_clusters < 1 || c.n_clusters > 3) throw ConfigError("propagation.n_clusters", "must be in [1, 3]");
  positive("radio.tx_power", c.tx_power);
  positive("radio.noise_power", c.noise_power);
  if (c.n_bs_beams < 2) throw ConfigError("antenna.n_bs_beams", "must be >= 2");
  if (c.n_ms_beams < 1) throw ConfigError("antenna.n_ms_beams", "must be >= 1");
  positive("antenna.front_to_back_constant", c.front_to_back_constant);
  if (c.bs_antennas < 1) throw ConfigError("antenna.bs_antennas", "must be >= 1");
  if (c.ms_antennas < 1) throw ConfigError("antenna.ms_antennas", "must be >= 1");
  if (!(c.pilot_reuse > 0.0 && c.pilot_reuse <= 1.0))
    throw ConfigError("training.pilot_reuse", "reuse factor out of range (0, 1]");
  if (!(c.wide_pilot_reuse >= 0.0 && c.wide_pilot_reuse <= 1.0))
    throw ConfigError("training.wide_pilot_reuse", "reuse factor out of range (0, 1]");
  if (c.coherence_symbols < 1) throw ConfigError("training.coherence_symbols", "must be >= 1");
  if (c.wide_bs_beams < 0) throw ConfigError("training.wide_bs_beams", "must be >= 0");
  if (c.wide_ms_beams < 0) throw ConfigError("training.wide_ms_beams", "must be >= 0");
  if (!(c.sinr_threshold_min >= 0.0) || std::isinf(c.sinr_threshold_min))
    throw ConfigError("link.sinr_threshold_min", "must be finite and >= 0");
  if (!(c.sinr_threshold_min < c.sinr_threshold_max))
    throw ConfigError("link.sinr_threshold_max", "must exceed sinr_threshold_min");
  if (c.interference_radius < 0.0) throw ConfigError("near_orth.interference_radius", "must be >= 0");
  if (!(c.epsilon1 > 0.0)) throw ConfigError("near_orth.epsilon1", "must be > 0");
  if (!(c.epsilon2 > 0.0 && c.epsilon2 < 1.0)) throw ConfigError("near_orth.epsilon2", "must be in (0, 1)");
}

/// Applies `key = value` on top of `config`.  Keys are "section.name"; a bare
/// name is accepted when it is unique across sections.
inline void apply_entry(ScenarioConfig& config, const std::string& raw_key, const std::string& value) {
  const std::string key = detail::lower(detail::trim(raw_key));
  const auto& specs = detail::field_specs();
  const detail::FieldSpec* match = nullptr;
  for (const auto& s : specs) {
    if (s.key == key) {
      match = &s;
      break;
    }
  }
  if (match == nullptr && key.find('.') == std::string::npos) {
    for (const auto& s : specs) {
      if (s.key.substr(s.key.find('.') + 1) == key) {
        if (match != nullptr) throw ConfigError(key, "ambiguous key; qualify it with a section");
        match = &s;
      }
    }
  }
  if (match == nullptr) throw ConfigError(key, "unknown configuration key");
  match->apply(config, match->key, value);
}

/// Parses noise-budget keys (bandwidth, noise_figure_db) that derive one field from two inputs.
inline ConfigEntries extract_noise_budget(ConfigEntries& entries, ScenarioConfig& config) {
  ConfigEntries taken;
  for (const char* k : {"radio.bandwidth", "radio.noise_figure_db", "bandwidth", "noise_figure_db"}) {
    if (auto it = entries.find(k); it != entries.end()) {
      taken[k] = it->second;
      entries.erase(it);
    }
  }
  if (!taken.empty()) {
    double bw = 100e6, nf = 10.0;
    for (const auto& [k, v] : taken) {
      if (k.ends_with("bandwidth")) bw = detail::parse_double(k, v);
      else nf = detail::parse_double(k, v);
    }
    if (!(bw > 0.0)) throw ConfigError("radio.bandwidth", "must be > 0");
    config.noise_power = thermal_noise_watt(bw, nf);
  }
  return taken;
}

/// Builds a validated config from parsed entries, on top of `base`.
inline ScenarioConfig load_scenario(ConfigEntries entries, ScenarioConfig base = {}) {
  ScenarioConfig config = base;
  // Order matters for the few keys that derive others: carrier first, noise budget next, explicit values last.
  for (const char* k : {"propagation.carrier_frequency", "carrier_frequency"}) {
    if (auto it = entries.find(k); it != entries.end()) {
      apply_entry(config, it->first, it->second);
      entries.erase(it);
    }
  }
  extract_noise_budget(entries, config);
  for (const auto& [k, v] : entries) apply_entry(config, k, v);
  validate(config);
  return config;
}

inline ScenarioConfig load_scenario_text(const std::string& text, ScenarioConfig base = {}) {
  return load_scenario(parse_config_text(text), std::move(base));
}

inline ScenarioConfig load_scenario_file(const std::string& path, ScenarioConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str(), std::move(base));
}

/// Canonical text form; sections and keys in a fixed order, shortest round-trip numbers.
inline std::string serialize(const ScenarioConfig& c) {
  using detail::format_double;
  std::ostringstream o;
  auto antenna = c.antenna == AntennaModel::kSectored ? "sectored" : "ula";
  auto paths = c.paths == PathModel::kSinglePath ? "single" : "multipath";
  auto beams = c.interferer_beams == InterfererBeams::kFixedRandom ? "fixed" : "sweep";
  o << "[network]\n"
    << "bs_density = " << format_double(c.bs_density) << "\n"
    << "los_range = " << format_double(c.los_range) << "\n"
    << "sim_window_radius = " << format_double(c.sim_window_radius) << "\n"
    << "sim_window_factor = " << format_double(c.sim_window_factor) << "\n"
    << "[propagation]\n"
    << "alpha_los = " << format_double(c.alpha_los) << "\n"
    << "alpha_nlos = " << format_double(c.alpha_nlos) << "\n"
    << "intercept_los = " << format_double(c.intercept_los) << "\n"
    << "intercept_nlos = " << format_double(c.intercept_nlos) << "\n"
    << "nakagami_los = " << c.nakagami_los << "\n"
    << "nakagami_nlos = " << c.nakagami_nlos << "\n"
    << "paths = " << paths << "\n"
    << "n_clusters = " << c.n_clusters << "\n"
    << "[radio]\n"
    << "tx_power = " << format_double(c.tx_power) << "\n"
    << "noise_power = " << format_double(c.noise_power) << "\n"
    << "[antenna]\n"
    << "model = " << antenna << "\n"
    << "n_bs_beams = " << c.n_bs_beams << "\n"
    << "n_ms_beams = " << c.n_ms_beams << "\n"
    << "front_to_back_constant = " << format_double(c.front_to_back_constant) << "\n"
    << "bs_antennas = " << c.bs_antennas << "\n"
    << "ms_antennas = " << c.ms_antennas << "\n"
    << "[training]\n"
    << "pilot_reuse = " << format_double(c.pilot_reuse) << "\n"
    << "coherence_symbols = " << c.coherence_symbols << "\n"
    << "wide_bs_beams = " << c.wide_bs_beams << "\n"
    << "wide_ms_beams = " << c.wide_ms_beams << "\n"
    << "wide_pilot_reuse = " << format_double(c.wide_pilot_reuse) << "\n"
    << "interferer_beams = " << beams << "\n"
    << "redraw_data_beams = " << (c.redraw_data_beams ? "true" : "false") << "\n"
    << "[link]\n"
    << "sinr_threshold_min = " << format_double(c.sinr_threshold_min) << "\n"
    << "sinr_threshold_max = " << format_double(c.sinr_threshold_max) << "\n"
    << "[near_orth]\n"
    << "interference_radius = " << format_double(c.interference_radius) << "\n"
    << "epsilon1 = " << format_double(c.epsilon1) << "\n"
    << "epsilon2 = " << format_double(c.epsilon2) << "\n";
  return o.str();
}

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
inline std::string fingerprint(const ScenarioConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mmwave_ba
