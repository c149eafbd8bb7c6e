#pragma once

// Monte Carlo drivers: per-drop evaluation of association procedures, sweeps
// over one scenario parameter, and pilot-reuse optimization.

#include "mmwave_ba/analytic.hpp"
#include "mmwave_ba/beam_training.hpp"
#include "mmwave_ba/channel.hpp"
#include "mmwave_ba/config.hpp"
#include "mmwave_ba/metrics.hpp"
#include "mmwave_ba/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace mmwave_ba {

enum class AssociationMode { kPerfect, kNearOrthogonal, kFullReuse, kReuse, kHierarchical };

inline const char* to_string(AssociationMode m) {
  switch (m) {
    case AssociationMode::kPerfect: return "perfect";
    case AssociationMode::kNearOrthogonal: return "near-orth";
    case AssociationMode::kFullReuse: return "full-reuse";
    case AssociationMode::kReuse: return "reuse";
    case AssociationMode::kHierarchical: return "hierarchical";
  }
  return "?";
}

inline AssociationMode parse_mode(const std::string& s) {
  for (auto m : {AssociationMode::kPerfect, AssociationMode::kNearOrthogonal, AssociationMode::kFullReuse,
                 AssociationMode::kReuse, AssociationMode::kHierarchical}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown association mode '" + s +
                              "' (expected perfect, near-orth, full-reuse, reuse, hierarchical)");
}

/// One procedure with its pilot reuse factors.  For near-orth the factor is
/// filled in from min_pilot_reuse.
struct Candidate {
  AssociationMode mode = AssociationMode::kPerfect;
  double delta = 1.0;
  double wide_delta = 1.0;
};

struct CandidateSamples {
  Candidate candidate;
  double eta = 1.0;
  std::vector<double> sinr;               // one per drop
  std::vector<Alignment> alignment;       // one per drop
  double p_obp = 0.0, p_sbp = 0.0, p_miss = 0.0;
  double rate(const ScenarioConfig& c) const {
    return effective_rate_from_samples(sinr, eta, c.sinr_threshold_min, c.sinr_threshold_max);
  }
  /// Standard error of the effective rate.
  double rate_stderr(const ScenarioConfig& c) const;
};

inline double CandidateSamples::rate_stderr(const ScenarioConfig& c) const {
  const double n = static_cast<double>(sinr.size());
  double s1 = 0.0, s2 = 0.0;
  for (double s : sinr) {
    const double r = rate_term(s, c.sinr_threshold_min, c.sinr_threshold_max);
    s1 += r;
    s2 += r * r;
  }
  const double mean = s1 / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return eta * std::sqrt(var / std::max(1.0, n - 1.0));
}

inline bool is_degenerate_hierarchy(const ScenarioConfig& c) {
  return c.effective_wide_bs_beams() == c.n_bs_beams && c.effective_wide_ms_beams() == c.n_ms_beams;
}

/// Shared per-point state.
struct PointContext {
  ScenarioConfig config;
  BeamCodebooks narrow;
  std::optional<BeamCodebooks> wide;
  std::optional<PilotReuseResult> near_orth;

  PointContext(const ScenarioConfig& c, bool need_wide, bool need_near_orth, std::uint64_t seed)
      : config(c), narrow(build_codebooks(c)) {
    if (need_wide && !is_degenerate_hierarchy(c)) wide = build_wide_codebooks(c);
    if (need_near_orth) near_orth = min_pilot_reuse(c, seed);
  }

  Candidate resolve(Candidate k) const {
    if (k.mode == AssociationMode::kNearOrthogonal) {
      if (!near_orth) throw std::logic_error("near-orthogonal candidate without a pilot reuse search");
      k.delta = near_orth->delta_min;
    }
    if (k.mode == AssociationMode::kFullReuse) k.delta = 1.0;
    return k;
  }

  double efficiency(const Candidate& k) const {
    const auto& c = config;
    switch (k.mode) {
      case AssociationMode::kPerfect: return 1.0;
      case AssociationMode::kHierarchical:
        if (!is_degenerate_hierarchy(c)) {
          return hierarchical_efficiency(c.effective_wide_bs_beams(), c.effective_wide_ms_beams(), k.wide_delta,
                                         c.n_bs_beams, c.n_ms_beams, k.delta, c.coherence_symbols);
        }
        [[fallthrough]];
      default: return resource_efficiency(1.0 / k.delta, c.n_bs_beams, c.n_ms_beams, c.coherence_symbols);
    }
  }
};

namespace detail {

inline int thread_count() {
  if (const char* env = std::getenv("MMWAVE_BA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over fixed chunks of indices.  Results must be
/// written by index, which keeps them independent of the thread count.
template <class Fn>
void parallel_chunks(int n, Fn fn, int chunk = 256) {
  const int chunks = (n + chunk - 1) / chunk;
  const int threads = std::min(thread_count(), std::max(1, chunks));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (int c = next++; c < chunks && !failed; c = next++) {
      try {
        fn(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

// Per-drop evaluation of many candidates with shared intermediate results.
class DropEvaluator {
 public:
  DropEvaluator(const PointContext& ctx, const Drop& drop) : ctx_(ctx), drop_(drop) {}

  std::pair<double, Alignment> evaluate(const Candidate& k) {
    BeamDecision d;
    switch (k.mode) {
      case AssociationMode::kPerfect:
        d = perfect_alignment(drop_, ctx_.narrow);
        break;
      case AssociationMode::kHierarchical:
        if (ctx_.wide) {
          d = hierarchical(k.wide_delta, k.delta);
          break;
        }
        [[fallthrough]];
      default:
        d = exhaustive(k.delta);
        break;
    }
    return {sinr(d), d.alignment};
  }

 private:
  const BeamSurface& narrow_surface(double delta) {
    for (auto& [key, s] : narrow_) {
      if (key == delta) return s;
    }
    const auto part = thin_copilot(drop_, delta, drop_.pilot_mark);
    narrow_.emplace_back(delta, control_snr_surface(drop_, part, ctx_.narrow, ctx_.narrow.bs, ctx_.config));
    return narrow_.back().second;
  }

  BeamDecision exhaustive(double delta) {
    const BeamSurface& s = narrow_surface(delta);
    BeamDecision d;
    if (!detail::argmax(s, 0, s.n_ms, 0, s.n_bs, d.ms_beam, d.bs_beam)) return BeamDecision{};
    d.alignment = classify_cached(d.ms_beam, d.bs_beam);
    return d;
  }

  BeamDecision hierarchical(double wide_delta, double delta) {
    const auto& wide = *ctx_.wide;
    std::pair<int, int> win{-1, -1};  // -2: nothing received in stage 1
    for (const auto& [key, w] : wide_) {
      if (key == wide_delta) win = w;
    }
    if (win.first < 0) {
      const auto part = thin_copilot(drop_, wide_delta, drop_.pilot_mark_wide);
      const BeamSurface s1 = control_snr_surface(drop_, part, wide, ctx_.narrow.bs, ctx_.config);
      int km = 0, kn = 0;
      win = detail::argmax(s1, 0, s1.n_ms, 0, s1.n_bs, km, kn) ? std::make_pair(km, kn) : std::make_pair(-2, -2);
      wide_.emplace_back(wide_delta, win);
    }
    if (win.first == -2) return BeamDecision{};
    const int rb = ctx_.narrow.bs.size() / wide.bs.size();
    const int rm = ctx_.narrow.ms.size() / wide.ms.size();
    const BeamSurface& s2 = narrow_surface(delta);
    BeamDecision d;
    if (!detail::argmax(s2, win.first * rm, (win.first + 1) * rm, win.second * rb, (win.second + 1) * rb, d.ms_beam,
                        d.bs_beam)) {
      d.alignment = Alignment::kMiss;
      return d;
    }
    d.alignment = classify_cached(d.ms_beam, d.bs_beam);
    return d;
  }

  Alignment classify_cached(int m, int n) {
    for (const auto& [key, a] : alignment_) {
      if (key == std::make_pair(m, n)) return a;
    }
    const Alignment a = classify(drop_, ctx_.narrow, m, n);
    alignment_.push_back({{m, n}, a});
    return a;
  }

  double sinr(const BeamDecision& d) {
    for (const auto& [key, v] : sinr_) {
      if (key == std::make_pair(d.ms_beam, d.bs_beam)) return v;
    }
    const double v = data_sinr(d, drop_, ctx_.narrow, ctx_.config);
    sinr_.push_back({{d.ms_beam, d.bs_beam}, v});
    return v;
  }

  const PointContext& ctx_;
  const Drop& drop_;
  std::vector<std::pair<double, BeamSurface>> narrow_;
  std::vector<std::pair<double, std::pair<int, int>>> wide_;
  std::vector<std::pair<std::pair<int, int>, Alignment>> alignment_;
  std::vector<std::pair<std::pair<int, int>, double>> sinr_;
};

}  // namespace detail

/// Evaluates every candidate on the same drops; drop i of sweep point `point`
/// uses the stream (seed, point, i).
inline std::vector<CandidateSamples> simulate_candidates(const PointContext& ctx, const std::vector<Candidate>& candidates,
                                                         int n_drops, std::uint64_t seed, std::uint64_t point = 0) {
  if (n_drops < 1) throw std::invalid_argument("n_drops must be >= 1");
  std::vector<CandidateSamples> out(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    out[k].candidate = ctx.resolve(candidates[k]);
    out[k].eta = ctx.efficiency(out[k].candidate);
    out[k].sinr.assign(static_cast<std::size_t>(n_drops), 0.0);
    out[k].alignment.assign(static_cast<std::size_t>(n_drops), Alignment::kMiss);
  }
  detail::parallel_chunks(n_drops, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Rng rng = make_stream(seed, point, static_cast<std::uint64_t>(i));
      const Drop drop = sample_drop(ctx.config, rng);
      detail::DropEvaluator ev(ctx, drop);
      for (auto& k : out) {
        const auto [s, a] = ev.evaluate(k.candidate);
        k.sinr[static_cast<std::size_t>(i)] = s;
        k.alignment[static_cast<std::size_t>(i)] = a;
      }
    }
  });
  for (auto& k : out) {
    int obp = 0, sbp = 0;
    for (auto a : k.alignment) {
      obp += a == Alignment::kObp;
      sbp += a == Alignment::kSbp;
    }
    k.p_obp = static_cast<double>(obp) / n_drops;
    k.p_sbp = static_cast<double>(sbp) / n_drops;
    k.p_miss = 1.0 - k.p_obp - k.p_sbp;
  }
  return out;
}

inline bool needs_wide(const std::vector<Candidate>& ks) {
  return std::any_of(ks.begin(), ks.end(), [](const Candidate& k) { return k.mode == AssociationMode::kHierarchical; });
}

inline bool needs_near_orth(const std::vector<Candidate>& ks) {
  return std::any_of(ks.begin(), ks.end(), [](const Candidate& k) { return k.mode == AssociationMode::kNearOrthogonal; });
}

inline Candidate default_candidate(AssociationMode mode, const ScenarioConfig& c) {
  return {mode, c.pilot_reuse, c.effective_wide_pilot_reuse()};
}

struct CoverageEstimate {
  CoverageCurve curve;
  double p_obp = 0.0, p_sbp = 0.0, p_miss = 0.0;
};

/// Empirical coverage of one procedure; every threshold sees the same drops.
inline CoverageEstimate coverage_estimate(AssociationMode mode, const std::vector<double>& thresholds, int n_drops,
                                          const ScenarioConfig& config, std::uint64_t seed = 1) {
  require_ascending(thresholds);
  const std::vector<Candidate> ks{default_candidate(mode, config)};
  const PointContext ctx(config, needs_wide(ks), needs_near_orth(ks), seed);
  auto s = simulate_candidates(ctx, ks, n_drops, seed);
  CoverageEstimate e;
  e.curve = coverage_from_samples(s[0].sinr, thresholds);
  e.p_obp = s[0].p_obp;
  e.p_sbp = s[0].p_sbp;
  e.p_miss = s[0].p_miss;
  return e;
}

inline RateReport effective_rate_empirical(AssociationMode mode, int n_drops, const ScenarioConfig& config,
                                           std::uint64_t seed = 1) {
  const std::vector<Candidate> ks{default_candidate(mode, config)};
  const PointContext ctx(config, needs_wide(ks), needs_near_orth(ks), seed);
  auto s = simulate_candidates(ctx, ks, n_drops, seed);
  RateReport r;
  r.eta = s[0].eta;
  r.rate = s[0].rate(config);
  const Candidate& k = s[0].candidate;
  if (mode == AssociationMode::kPerfect) {
    r.pilot_count = 1.0;
    r.training_symbols = 0.0;
  } else if (mode == AssociationMode::kHierarchical && !is_degenerate_hierarchy(config)) {
    r.pilot_count = 1.0 / k.delta;
    r.training_symbols = hierarchical_training_symbols(config.effective_wide_bs_beams(), config.effective_wide_ms_beams(),
                                                       k.wide_delta, config.n_bs_beams, config.n_ms_beams, k.delta);
  } else {
    r.pilot_count = 1.0 / k.delta;
    r.training_symbols = r.pilot_count * config.n_bs_beams * config.n_ms_beams;
  }
  return r;
}

/// Parameters a sweep may vary.  Beamwidths are in degrees.
inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"cell_radius",       "bs_beamwidth", "ms_beamwidth",      "pilot_reuse",
                                              "coherence_symbols", "los_range",    "wide_codebook_size"};
  return names;
}

inline ScenarioConfig apply_sweep(ScenarioConfig c, const std::string& param, double v) {
  auto beams = [&](double deg) {
    if (!(deg > 0.0 && deg <= 360.0)) throw ConfigError(param, "beamwidth must be in (0, 360] degrees");
    return static_cast<int>(std::lround(360.0 / deg));
  };
  if (param.empty()) return c;
  if (param == "cell_radius") {
    if (!(v > 0.0)) throw ConfigError(param, "must be > 0");
    c.set_cell_radius(v);
  } else if (param == "bs_beamwidth") {
    c.n_bs_beams = beams(v);
  } else if (param == "ms_beamwidth") {
    c.n_ms_beams = beams(v);
  } else if (param == "pilot_reuse") {
    c.pilot_reuse = v;
  } else if (param == "coherence_symbols") {
    if (v != std::floor(v)) throw ConfigError(param, "must be an integer");
    c.coherence_symbols = static_cast<int>(v);
  } else if (param == "los_range") {
    c.los_range = v;
  } else if (param == "wide_codebook_size") {
    if (v != std::floor(v)) throw ConfigError(param, "must be an integer");
    c.wide_bs_beams = static_cast<int>(v);
  } else {
    std::string names;
    for (const auto& n : sweep_parameters()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError(param, "unknown sweep parameter (valid: " + names + ")");
  }
  validate(c);
  return c;
}

struct Experiment {
  ScenarioConfig base;
  std::string sweep_param;  // empty: a single point
  std::vector<double> sweep_values;
  std::vector<AssociationMode> modes{AssociationMode::kPerfect, AssociationMode::kFullReuse};
  int n_drops = 10000;
  std::uint64_t seed = 1;
  std::vector<double> thresholds;  // coverage grid (linear); empty: no curves
  bool alignment_stats = true;
  bool optimize_pilots = false;
  std::vector<double> pilot_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  bool common_drops = false;  // reuse drop streams across sweep points
};

struct ResultRow {
  double sweep_value = std::numeric_limits<double>::quiet_NaN();
  AssociationMode mode = AssociationMode::kPerfect;
  std::string curve_id;
  double r_eff = std::numeric_limits<double>::quiet_NaN();
  double r_eff_stderr = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double p_obp = std::numeric_limits<double>::quiet_NaN();
  double p_sbp = std::numeric_limits<double>::quiet_NaN();
  double p_miss = std::numeric_limits<double>::quiet_NaN();
  double pilot_reuse = std::numeric_limits<double>::quiet_NaN();
  double wide_pilot_reuse = std::numeric_limits<double>::quiet_NaN();
  bool exhaustive = false;  // hierarchical point whose wide codebook equals the narrow one
  double runtime_s = 0.0;
  std::uint64_t seed = 0;
  std::string error;
  CoverageCurve curve;
};

namespace detail {

inline std::vector<Candidate> candidates_for(AssociationMode mode, const ScenarioConfig& c, bool optimize,
                                             const std::vector<double>& grid) {
  if (!optimize || mode == AssociationMode::kPerfect || mode == AssociationMode::kNearOrthogonal ||
      mode == AssociationMode::kFullReuse) {
    return {default_candidate(mode, c)};
  }
  std::vector<Candidate> out;
  if (mode == AssociationMode::kHierarchical && !is_degenerate_hierarchy(c)) {
    for (double wd : grid) {
      for (double d : grid) out.push_back({mode, d, wd});
    }
  } else {
    for (double d : grid) out.push_back({mode, d, d});
  }
  return out;
}

// Best candidate by effective rate; ties go to the larger reuse factors.
inline std::size_t best_candidate(const std::vector<CandidateSamples>& s, std::size_t begin, std::size_t end,
                                  const ScenarioConfig& c) {
  std::size_t best = begin;
  double best_rate = s[begin].rate(c);
  for (std::size_t i = begin + 1; i < end; ++i) {
    const double r = s[i].rate(c);
    const auto& a = s[i].candidate;
    const auto& b = s[best].candidate;
    const bool larger = a.wide_delta > b.wide_delta || (a.wide_delta == b.wide_delta && a.delta > b.delta);
    if (r > best_rate || (r == best_rate && larger)) {
      best = i;
      best_rate = r;
    }
  }
  return best;
}

}  // namespace detail

/// Runs every (sweep value, mode) point.  A failing point yields a row with
/// `error` set; the sweep continues.
inline std::vector<ResultRow> run_experiment(const Experiment& e) {
  if (e.n_drops < 1) throw std::invalid_argument("n_drops must be >= 1");
  if (!e.thresholds.empty()) require_ascending(e.thresholds);
  for (double d : e.pilot_grid) {
    if (!(d > 0.0 && d <= 1.0)) throw std::invalid_argument("pilot grid values must lie in (0, 1]");
  }
  std::vector<double> values = e.sweep_values;
  if (e.sweep_param.empty()) values = {std::numeric_limits<double>::quiet_NaN()};
  if (values.empty()) throw std::invalid_argument("sweep has no values");
  std::vector<ResultRow> rows;
  for (std::size_t p = 0; p < values.size(); ++p) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ResultRow> point_rows;
    try {
      const ScenarioConfig c = e.sweep_param.empty() ? e.base : apply_sweep(e.base, e.sweep_param, values[p]);
      std::vector<Candidate> all;
      std::vector<std::pair<std::size_t, std::size_t>> ranges;
      for (auto mode : e.modes) {
        const auto ks = detail::candidates_for(mode, c, e.optimize_pilots, e.pilot_grid);
        ranges.emplace_back(all.size(), all.size() + ks.size());
        all.insert(all.end(), ks.begin(), ks.end());
      }
      const PointContext ctx(c, needs_wide(all), needs_near_orth(all), e.seed);
      const auto samples = simulate_candidates(ctx, all, e.n_drops, e.seed, e.common_drops ? 0 : p);
      for (std::size_t m = 0; m < e.modes.size(); ++m) {
        const auto [b, en] = ranges[m];
        const auto& s = samples[detail::best_candidate(samples, b, en, c)];
        ResultRow row;
        row.sweep_value = values[p];
        row.mode = e.modes[m];
        row.curve_id = "p" + std::to_string(p) + "-" + to_string(e.modes[m]);
        row.r_eff = s.rate(c);
        row.r_eff_stderr = s.rate_stderr(c);
        row.eta = s.eta;
        if (e.alignment_stats) {
          row.p_obp = s.p_obp;
          row.p_sbp = s.p_sbp;
          row.p_miss = s.p_miss;
        }
        row.pilot_reuse = e.modes[m] == AssociationMode::kPerfect ? std::numeric_limits<double>::quiet_NaN() : s.candidate.delta;
        if (e.modes[m] == AssociationMode::kHierarchical && !is_degenerate_hierarchy(c)) row.wide_pilot_reuse = s.candidate.wide_delta;
        row.exhaustive = e.modes[m] == AssociationMode::kHierarchical && is_degenerate_hierarchy(c);
        row.seed = e.seed;
        if (!e.thresholds.empty()) row.curve = coverage_from_samples(s.sinr, e.thresholds);
        point_rows.push_back(std::move(row));
      }
    } catch (const std::exception& ex) {
      point_rows.clear();
      for (auto mode : e.modes) {
        ResultRow row;
        row.sweep_value = values[p];
        row.mode = mode;
        row.curve_id = "p" + std::to_string(p) + "-" + to_string(mode);
        row.seed = e.seed;
        row.error = ex.what();
        point_rows.push_back(std::move(row));
      }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : point_rows) {
      r.runtime_s = elapsed;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

/// Best reuse factor per sweep point for the first non-perfect mode of the experiment.
inline std::vector<Candidate> optimize_pilot_reuse(Experiment e, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("optimize_pilot_reuse: empty grid");
  e.pilot_grid = grid;
  e.optimize_pilots = true;
  e.thresholds.clear();
  AssociationMode mode = AssociationMode::kReuse;
  for (auto m : e.modes) {
    if (m == AssociationMode::kReuse || m == AssociationMode::kHierarchical) {
      mode = m;
      break;
    }
  }
  e.modes = {mode};
  std::vector<Candidate> best;
  for (const auto& row : run_experiment(e)) {
    if (!row.error.empty()) throw std::runtime_error(row.error);
    best.push_back({mode, row.pilot_reuse, std::isnan(row.wide_pilot_reuse) ? row.pilot_reuse : row.wide_pilot_reuse});
  }
  return best;
}

}  // namespace mmwave_ba
