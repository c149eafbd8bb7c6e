#pragma once

// Command-line front end: coverage, sweep and validate subcommands.
// Exit codes: 0 success, 1 validation or numerical failure, 2 usage error.

#include "mmwave_ba/analytic.hpp"
#include "mmwave_ba/config.hpp"
#include "mmwave_ba/metrics.hpp"
#include "mmwave_ba/sim_engine.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef MMWAVE_BA_VERSION
#define MMWAVE_BA_VERSION "0.1.0-unknown"
#endif

namespace mmwave_ba::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kSchemaVersion = 1;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double parse_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + text + "'");
  }
  if (used != text.size()) throw UsageError("not a number: '" + text + "'");
  return v;
}

/// "a:step:b" in dB, inclusive, ascending.
inline std::vector<double> parse_grid_db(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("grid must look like start:step:stop, got '" + text + "'");
  const double a = parse_number(parts[0]), step = parse_number(parts[1]), b = parse_number(parts[2]);
  if (!(step > 0.0) || !(b >= a)) throw UsageError("grid '" + text + "' is not ascending (need step > 0 and stop >= start)");
  const int n = static_cast<int>(std::floor((b - a) / step + 1e-9)) + 1;
  if (n > 100000) throw UsageError("grid '" + text + "' has too many points");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + i * step);
  return out;
}

/// "v1,v2,..." or "a..b" (10 points) or "a..b/n", inclusive and evenly spaced.
inline std::vector<double> parse_values(const std::string& text) {
  if (text.empty()) throw UsageError("--values is empty");
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    std::string rest = text.substr(dots + 2);
    int n = 10;
    if (const auto slash = rest.find('/'); slash != std::string::npos) {
      const double nd = parse_number(rest.substr(slash + 1));
      if (nd < 1 || nd != std::floor(nd)) throw UsageError("point count in '" + text + "' must be a positive integer");
      n = static_cast<int>(nd);
      rest = rest.substr(0, slash);
    }
    const double a = parse_number(text.substr(0, dots)), b = parse_number(rest);
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    if (p.empty()) throw UsageError("empty entry in --values '" + text + "'");
    out.push_back(parse_number(p));
  }
  return out;
}

inline std::vector<AssociationMode> parse_modes(const std::string& text) {
  std::vector<AssociationMode> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    try {
      out.push_back(parse_mode(p));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no modes given");
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

inline std::string fmt(double v) { return std::isnan(v) ? std::string() : detail::format_double(v); }

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  int drops = 10000;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string json_path;
  bool no_timestamp = false;
};

inline ScenarioConfig load_config(const CommonOptions& o) {
  ScenarioConfig c = load_scenario_file(o.config_path);
  if (o.overrides.empty()) return c;
  ConfigEntries extra;
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    extra[detail::trim(kv.substr(0, eq))] = detail::trim(kv.substr(eq + 1));
  }
  return load_scenario(extra, c);
}

// Writes to --out or the given stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << j.dump(2) << "\n";
}

inline nlohmann::json provenance(const ScenarioConfig& c, const CommonOptions& o) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = MMWAVE_BA_VERSION;
  j["fingerprint"] = fingerprint(c);
  j["config"] = serialize(c);
  j["seed"] = o.seed;
  j["drops"] = o.drops;
  if (!o.no_timestamp) j["generated"] = utc_timestamp();
  return j;
}

struct CoverageOptions {
  std::string mode = "full-reuse";
  std::string grid = "-10:2:30";
  bool bounds = false;
};

inline int cmd_coverage(const CommonOptions& o, const CoverageOptions& co, std::ostream& out, std::ostream& err) {
  const ScenarioConfig c = load_config(o);
  const AssociationMode mode = parse_modes(co.mode).at(0);
  const std::vector<double> t_db = parse_grid_db(co.grid);
  std::vector<double> t;
  for (double d : t_db) t.push_back(db_to_linear(d));

  const CoverageEstimate sim = coverage_estimate(mode, t, o.drops, c, o.seed);
  const std::size_t n = t.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ub(n, nan), lb(n, nan), no(n, nan);
  if (co.bounds) {
    const bool full = mode == AssociationMode::kFullReuse || (mode == AssociationMode::kReuse && c.pilot_reuse == 1.0);
    const bool orth = mode == AssociationMode::kNearOrthogonal || mode == AssociationMode::kPerfect;
    if (c.antenna != AntennaModel::kSectored || c.paths != PathModel::kSinglePath) {
      err << "note: analytic curves need the sectored single-path model; bound columns left empty\n";
    } else if (full || orth) {
      mmwave_ba::detail::parallel_chunks(
          static_cast<int>(n),
          [&](int b, int e) {
            for (int i = b; i < e; ++i) {
              const auto k = static_cast<std::size_t>(i);
              if (full) {
                ub[k] = theorem1_upper(t[k], c);
                lb[k] = theorem2_lower(t[k], c);
              } else {
                no[k] = near_orth_coverage(t[k], c);
              }
            }
          },
          1);
    } else {
      err << "note: no analytic curve for mode " << to_string(mode) << " with pilot reuse " << c.pilot_reuse << "\n";
    }
  }

  Sink sink(o.out_path, out);
  auto& os = sink.stream();
  if (!o.no_timestamp) os << "# generated " << utc_timestamp() << "\n";
  os << "# mmwave_ba " << MMWAVE_BA_VERSION << " fingerprint=" << fingerprint(c) << " mode=" << to_string(mode)
     << " seed=" << o.seed << " drops=" << o.drops << "\n";
  os << "t_db,p_c_sim,p_c_thm1_ub,p_c_thm2_lb,p_c_near_orth\n";
  for (std::size_t i = 0; i < n; ++i) {
    os << fmt(t_db[i]) << ',' << fmt(sim.curve.coverage[i]) << ',' << fmt(ub[i]) << ',' << fmt(lb[i]) << ','
       << fmt(no[i]) << "\n";
  }

  if (!o.json_path.empty()) {
    auto j = provenance(c, o);
    j["mode"] = to_string(mode);
    j["p_obp"] = sim.p_obp;
    j["p_sbp"] = sim.p_sbp;
    j["p_miss"] = sim.p_miss;
    auto curve = [&](const std::vector<double>& p) {
      nlohmann::json a = nlohmann::json::array();
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isnan(p[i])) a.push_back({t_db[i], p[i]});
      }
      return a;
    };
    j["curves"] = {{to_string(Provenance::kSim), curve(sim.curve.coverage)},
                   {to_string(Provenance::kThm1Upper), curve(ub)},
                   {to_string(Provenance::kThm2Lower), curve(lb)},
                   {to_string(Provenance::kNearOrth), curve(no)}};
    write_json(o.json_path, j);
  }
  return kExitOk;
}

struct SweepOptions {
  std::string param;
  std::string values;
  std::string modes = "perfect,full-reuse";
  bool optimize_pilots = false;
  std::string pilot_grid = "0.1..1/10";
  bool common_drops = false;
};

inline int cmd_sweep(const CommonOptions& o, const SweepOptions& so, std::ostream& out, std::ostream& err) {
  const auto& names = sweep_parameters();
  if (std::find(names.begin(), names.end(), so.param) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("unknown sweep parameter '" + so.param + "'; valid: " + list);
  }
  Experiment e;
  e.base = load_config(o);
  e.sweep_param = so.param;
  e.sweep_values = parse_values(so.values);
  e.modes = parse_modes(so.modes);
  e.n_drops = o.drops;
  e.seed = o.seed;
  e.optimize_pilots = so.optimize_pilots;
  e.pilot_grid = parse_values(so.pilot_grid);
  e.common_drops = so.common_drops;
  for (double d : e.pilot_grid) {
    if (!(d > 0.0 && d <= 1.0)) throw UsageError("pilot grid values must lie in (0, 1]");
  }
  const auto rows = run_experiment(e);

  Sink sink(o.out_path, out);
  auto& os = sink.stream();
  if (!o.no_timestamp) os << "# generated " << utc_timestamp() << "\n";
  os << "# mmwave_ba " << MMWAVE_BA_VERSION << " fingerprint=" << fingerprint(e.base) << " param=" << so.param
     << " seed=" << o.seed << " drops=" << o.drops << "\n";
  os << "value,mode,curve_id,r_eff,r_eff_se,eta,p_obp,p_sbp,p_miss,pilot_reuse,wide_pilot_reuse,flag,error\n";
  int failures = 0;
  for (const auto& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    if (!r.error.empty()) {
      ++failures;
      err << "point " << fmt(r.sweep_value) << " (" << to_string(r.mode) << ") failed: " << r.error << "\n";
    }
    os << fmt(r.sweep_value) << ',' << to_string(r.mode) << ',' << r.curve_id << ',' << fmt(r.r_eff) << ','
       << fmt(r.r_eff_stderr) << ',' << fmt(r.eta) << ',' << fmt(r.p_obp) << ',' << fmt(r.p_sbp) << ','
       << fmt(r.p_miss) << ',' << fmt(r.pilot_reuse) << ',' << fmt(r.wide_pilot_reuse) << ','
       << (r.exhaustive ? "exhaustive" : "") << ',' << error << "\n";
  }

  std::string json_path = o.json_path;
  if (json_path.empty() && !o.out_path.empty()) json_path = o.out_path + ".json";
  if (!json_path.empty()) {
    auto j = provenance(e.base, o);
    j["param"] = so.param;
    j["optimize_pilots"] = so.optimize_pilots;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json row{{"value", r.sweep_value},   {"mode", to_string(r.mode)}, {"curve_id", r.curve_id},
                         {"runtime_s", r.runtime_s}, {"seed", r.seed},            {"exhaustive", r.exhaustive}};
      auto put = [&](const char* k, double v) { row[k] = std::isnan(v) ? nlohmann::json() : nlohmann::json(v); };
      put("r_eff", r.r_eff);
      put("r_eff_se", r.r_eff_stderr);
      put("eta", r.eta);
      put("p_obp", r.p_obp);
      put("p_sbp", r.p_sbp);
      put("p_miss", r.p_miss);
      put("pilot_reuse", r.pilot_reuse);
      put("wide_pilot_reuse", r.wide_pilot_reuse);
      if (!r.error.empty()) row["error"] = r.error;
      j["rows"].push_back(row);
    }
    write_json(json_path, j);
  }
  return failures == 0 ? kExitOk : kExitFailure;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Cross-module checks on one config.  `drops` sets every Monte Carlo size.
inline std::vector<CheckResult> run_validation(const ScenarioConfig& c, int drops, std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool pass, std::string detail) { out.push_back({std::move(name), pass, std::move(detail)}); };
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
  };
  const bool analytic_model = c.antenna == AntennaModel::kSectored && c.paths == PathModel::kSinglePath;

  // association probabilities: normalization and frequency match
  try {
    const auto a = association_probs(c);
    const double sum = a.los + a.nlos;
    add("association_normalization", std::abs(sum - 1.0) <= 1e-6, "A_L + A_N = " + num(sum));
    int los = 0;
    for (int i = 0; i < drops; ++i) {
      Rng rng = make_stream(seed, 0xa550cULL, static_cast<std::uint64_t>(i));
      const auto net = sample_network(c, rng);
      los += net.bs[net.serving_index].is_los;
    }
    const double f = static_cast<double>(los) / drops;
    const double tol = std::max(0.01, 4.0 * std::sqrt(a.los * (1.0 - a.los) / drops));
    add("association_frequency", std::abs(f - a.los) <= tol, "MC " + num(f) + " vs A_L " + num(a.los) + " (tol " + num(tol) + ")");
  } catch (const std::exception& e) {
    add("association_normalization", false, e.what());
  }

  // full-reuse samples shared by the remaining checks
  ScenarioConfig full = c;
  full.pilot_reuse = 1.0;
  const PointContext ctx(full, false, false, seed);
  const auto samples = simulate_candidates(ctx, {{AssociationMode::kFullReuse, 1.0, 1.0}}, drops, seed).front();

  if (analytic_model) {
    for (double t_db : {0.0, 10.0, 20.0}) {
      const double t = db_to_linear(t_db);
      const double sim = coverage_from_samples(samples.sinr, {t}).coverage[0];
      const double ub = theorem1_upper(t, full), lb = theorem2_lower(t, full);
      const double slack = 0.03 + 3.0 * std::sqrt(0.25 / drops);
      add("sandwich_" + num(t_db) + "dB", lb - slack <= sim && sim <= ub + slack,
          "LB " + num(lb) + " <= SIM " + num(sim) + " <= UB " + num(ub));
    }
  } else {
    add("sandwich", true, "skipped: analytic curves need the sectored single-path model");
  }

  // rate from samples vs rate from the coverage curve
  {
    const double hi = std::isinf(c.sinr_threshold_max) ? db_to_linear(100.0) : c.sinr_threshold_max;
    std::vector<double> grid;
    const double lo_db = linear_to_db(c.sinr_threshold_min), hi_db = linear_to_db(hi);
    for (int i = 0; i < 200; ++i) grid.push_back(db_to_linear(lo_db + (hi_db - lo_db) * i / 199.0));
    grid.front() = c.sinr_threshold_min;
    grid.back() = hi;
    const double direct = effective_rate_from_samples(samples.sinr, 1.0, c.sinr_threshold_min, c.sinr_threshold_max);
    try {
      const double via = effective_rate_from_coverage(coverage_from_samples(samples.sinr, grid), 1.0,
                                                      c.sinr_threshold_min, c.sinr_threshold_max);
      const double rel = std::abs(via - direct) / std::max(direct, 1e-12);
      add("rate_estimators", rel <= 0.02, "samples " + num(direct) + " vs curve " + num(via) + " (rel " + num(rel) + ")");
    } catch (const std::exception& e) {
      add("rate_estimators", false, e.what());
    }
  }

  // no SBP under full reuse
  {
    add("no_sbp_full_reuse", samples.p_sbp == 0.0, "P(SBP) = " + num(samples.p_sbp));
  }

  // edge effect: drops on a doubled window, restricted back to the configured one
  {
    ScenarioConfig wide = full;
    wide.sim_window_radius = 2.0 * full.window_radius();
    const BeamCodebooks cb = build_codebooks(full);
    const auto t_grid = db_grid(-10.0, 30.0, 9);
    std::vector<double> inner(static_cast<std::size_t>(drops), 0.0), outer(static_cast<std::size_t>(drops), 0.0);
    std::vector<char> keep(static_cast<std::size_t>(drops), 0);
    mmwave_ba::detail::parallel_chunks(drops, [&](int b, int e) {
      for (int i = b; i < e; ++i) {
        Rng rng = make_stream(seed, 0xed6eULL, static_cast<std::uint64_t>(i));
        const Drop big = sample_drop(wide, rng);
        Drop small;
        if (!restrict_drop(big, full.window_radius(), small)) continue;
        const auto k = static_cast<std::size_t>(i);
        keep[k] = 1;
        const auto db = exhaustive_sweep(big, full_reuse_partition(big), cb, full);
        const auto ds = exhaustive_sweep(small, full_reuse_partition(small), cb, full);
        outer[k] = data_sinr(db, big, cb, full);
        inner[k] = data_sinr(ds, small, cb, full);
      }
    });
    std::vector<double> a, b;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (keep[i]) {
        a.push_back(inner[i]);
        b.push_back(outer[i]);
      }
    }
    double shift = 0.0;
    if (!a.empty()) {
      const auto ca = coverage_from_samples(a, t_grid), cb2 = coverage_from_samples(b, t_grid);
      for (std::size_t i = 0; i < t_grid.size(); ++i) shift = std::max(shift, std::abs(ca.coverage[i] - cb2.coverage[i]));
    }
    add("edge_effect", !a.empty() && shift <= 0.005,
        "max coverage shift on window doubling " + num(shift) + " (window " + num(full.window_radius()) + " m)");
  }
  return out;
}

inline int cmd_validate(const CommonOptions& o, bool quick, std::ostream& out) {
  const ScenarioConfig c = load_config(o);
  const int drops = quick ? 1000 : o.drops;
  const auto checks = run_validation(c, drops, o.seed);
  int failed = 0;
  Sink sink(o.out_path, out);
  auto& os = sink.stream();
  for (const auto& ch : checks) {
    os << (ch.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(28) << ch.name << ch.detail << "\n";
    failed += !ch.pass;
  }
  os << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

/// Entry point; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmWave initial beam association: coverage, rate sweeps and self-checks"};
  app.require_subcommand(1);
  CommonOptions common;
  CoverageOptions cov;
  SweepOptions sw;
  bool quick = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config_path, "scenario file")->required();
    sub->add_option("--set", common.overrides, "override a config key (key=value), repeatable");
    sub->add_option("--drops", common.drops, "Monte Carlo drops per point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "base seed");
    sub->add_option("--out,-o", common.out_path, "output file (default stdout)");
    sub->add_option("--json", common.json_path, "JSON sidecar path");
    sub->add_flag("--no-timestamp", common.no_timestamp, "omit the timestamp header line");
  };
  auto* coverage = app.add_subcommand("coverage", "coverage curve of one association mode");
  add_common(coverage);
  coverage->add_option("--mode", cov.mode, "perfect, near-orth, full-reuse, reuse or hierarchical");
  coverage->add_option("--t-grid-db", cov.grid, "threshold grid start:step:stop in dB");
  coverage->add_flag("--bounds", cov.bounds, "add the analytic curves");

  auto* sweep = app.add_subcommand("sweep", "effective rate over one swept parameter");
  add_common(sweep);
  sweep->add_option("--param", sw.param, "parameter to sweep")->required();
  sweep->add_option("--values", sw.values, "v1,v2,... or a..b[/n]")->required();
  sweep->add_option("--modes", sw.modes, "comma-separated association modes");
  sweep->add_flag("--optimize-pilots", sw.optimize_pilots, "pick the best reuse factor per point");
  sweep->add_option("--pilot-grid", sw.pilot_grid, "reuse factors tried by --optimize-pilots");
  sweep->add_flag("--common-drops", sw.common_drops, "same drop streams at every sweep point");

  auto* validate_cmd = app.add_subcommand("validate", "run the cross-module checks");
  add_common(validate_cmd);
  validate_cmd->add_flag("--quick", quick, "1000-drop smoke run");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*coverage) return cmd_coverage(common, cov, out, err);
    if (*sweep) return cmd_sweep(common, sw, out, err);
    return cmd_validate(common, quick, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mmwave_ba::cli
