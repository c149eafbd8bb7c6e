#pragma once

// Data-phase SINR, coverage curves, training overhead and effective rate.

#include "mmwave_ba/beam_training.hpp"
#include "mmwave_ba/channel.hpp"
#include "mmwave_ba/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmwave_ba {

enum class Provenance { kSim, kThm1Upper, kThm2Lower, kNearOrth };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kSim: return "SIM";
    case Provenance::kThm1Upper: return "THM1_UB";
    case Provenance::kThm2Lower: return "THM2_LB";
    case Provenance::kNearOrth: return "NEAR_ORTH";
  }
  return "?";
}

struct CoverageCurve {
  std::vector<double> thresholds;  // linear, ascending
  std::vector<double> coverage;
  Provenance provenance = Provenance::kSim;
};

struct RateReport {
  double eta = 0.0;
  double rate = 0.0;               // bits/s/Hz
  double pilot_count = 1.0;        // Pi_p = 1 / delta, not rounded
  double training_symbols = 0.0;   // L_T
};

/// Throws unless the grid is strictly ascending.
inline void require_ascending(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("threshold grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("threshold grid must be strictly ascending");
  }
}

/// `n` points evenly spaced in dB on [lo_db, hi_db], returned linear.
inline std::vector<double> db_grid(double lo_db, double hi_db, int n) {
  if (n < 1) throw std::invalid_argument("db_grid: need at least one point");
  std::vector<double> g;
  for (int i = 0; i < n; ++i) {
    const double db = n == 1 ? lo_db : lo_db + (hi_db - lo_db) * i / (n - 1);
    g.push_back(db_to_linear(db));
  }
  return g;
}

/// Data-phase SINR with the trained beams.  Interferers use their data beams.
inline double data_sinr(const BeamDecision& decision, const Drop& drop, const BeamCodebooks& cb,
                        const ScenarioConfig& config) {
  const std::size_t serving = drop.serving();
  double signal = 0.0;
  for (const Link& c : drop.links[serving]) {
    signal += c.fading * c.path_loss * cb.ms.gain(decision.ms_beam, c.aoa) * cb.bs.gain(decision.bs_beam, c.aod);
  }
  if (!(signal > 0.0)) return 0.0;
  double interference = 0.0;
  const bool sectored_ms = cb.ms.is_sectored() && cb.ms.sectored().side_gain() == 0.0;
  for (std::size_t l = 0; l < drop.size(); ++l) {
    if (l == serving) continue;
    const int beam = beam_from_mark(drop.data_beam[l], cb.bs.size());
    for (const Link& c : drop.links[l]) {
      if (sectored_ms && cb.ms.sectored().beam_containing(c.aoa) != decision.ms_beam) continue;
      interference += c.fading * c.path_loss * cb.ms.gain(decision.ms_beam, c.aoa) * cb.bs.gain(beam, c.aod);
    }
  }
  return config.tx_power * signal / (config.tx_power * interference + config.noise_power);
}

/// Fraction of samples with SINR > T at every T of an ascending grid.
inline CoverageCurve coverage_from_samples(std::vector<double> sinr, const std::vector<double>& thresholds) {
  require_ascending(thresholds);
  if (sinr.empty()) throw std::invalid_argument("coverage_from_samples: no samples");
  std::sort(sinr.begin(), sinr.end());
  CoverageCurve c;
  c.thresholds = thresholds;
  c.provenance = Provenance::kSim;
  const double n = static_cast<double>(sinr.size());
  for (double t : thresholds) {
    const auto above = sinr.end() - std::upper_bound(sinr.begin(), sinr.end(), t);
    c.coverage.push_back(static_cast<double>(above) / n);
  }
  return c;
}

inline double resource_efficiency(double pilot_count, double n_bs, double n_ms, double coherence_symbols) {
  return std::max(0.0, 1.0 - pilot_count * n_bs * n_ms / coherence_symbols);
}

inline double hierarchical_training_symbols(double wide_bs, double wide_ms, double wide_delta, double n_bs,
                                            double n_ms, double delta) {
  return wide_bs * wide_ms / wide_delta + (n_bs / wide_bs) * (n_ms / wide_ms) / delta;
}

inline double hierarchical_efficiency(double wide_bs, double wide_ms, double wide_delta, double n_bs, double n_ms,
                                      double delta, double coherence_symbols) {
  if (std::fmod(n_bs, wide_bs) != 0.0 || std::fmod(n_ms, wide_ms) != 0.0) {
    throw std::invalid_argument("hierarchical_efficiency: narrow sizes must be multiples of wide sizes");
  }
  return std::max(0.0, 1.0 - hierarchical_training_symbols(wide_bs, wide_ms, wide_delta, n_bs, n_ms, delta) /
                                 coherence_symbols);
}

inline constexpr double kTailCoverage = 1e-4;

/// eta [ (1/ln 2) int_{T_th}^{T_max} P_c(y)/(1+y) dy + log2(1+T_th) P_c(T_th) ].
/// P_c is taken piecewise linear between grid points and 1/(1+y) is integrated
/// exactly on each panel.  An unbounded T_max needs the curve to fall below
/// 1e-4 by its last point; the rest of the tail is dropped.
inline double effective_rate_from_coverage(const CoverageCurve& curve, double eta, double t_th, double t_max) {
  const auto& y = curve.thresholds;
  const auto& p = curve.coverage;
  require_ascending(y);
  if (p.size() != y.size()) throw std::invalid_argument("coverage curve size mismatch");
  if (!(t_th < t_max)) throw std::invalid_argument("T_th must be below T_max");
  const double rel = 1e-9;
  if (y.front() > t_th * (1.0 + rel)) throw std::invalid_argument("coverage curve does not reach down to T_th");
  double upper = t_max;
  if (std::isinf(t_max)) {
    if (p.back() >= kTailCoverage) throw std::invalid_argument("coverage curve tail does not fall below 1e-4");
    upper = y.back();
  } else if (y.back() < t_max * (1.0 - rel)) {
    throw std::invalid_argument("coverage curve does not reach T_max");
  }
  auto interp = [&](double t) {
    if (t <= y.front()) return p.front();
    if (t >= y.back()) return p.back();
    const auto it = std::upper_bound(y.begin(), y.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - y.begin());
    const double f = (std::log(t) - std::log(y[i - 1])) / (std::log(y[i]) - std::log(y[i - 1]));
    return p[i - 1] + f * (p[i] - p[i - 1]);
  };
  std::vector<double> ty{t_th}, tp{interp(t_th)};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > t_th && y[i] < upper) {
      ty.push_back(y[i]);
      tp.push_back(p[i]);
    }
  }
  ty.push_back(upper);
  tp.push_back(interp(upper));
  double integral = 0.0;
  for (std::size_t i = 1; i < ty.size(); ++i) {
    integral += 0.5 * (tp[i] + tp[i - 1]) * (std::log1p(ty[i]) - std::log1p(ty[i - 1]));
  }
  return eta * (integral / std::numbers::ln2 + std::log2(1.0 + t_th) * tp.front());
}

/// Per-drop rate term log2(1 + min(SINR, T_max)) 1{SINR >= T_th}.
inline double rate_term(double sinr, double t_th, double t_max) {
  if (!(sinr >= t_th)) return 0.0;
  return std::log2(1.0 + std::min(sinr, t_max));
}

inline double effective_rate_from_samples(const std::vector<double>& sinr, double eta, double t_th, double t_max) {
  if (sinr.empty()) throw std::invalid_argument("effective_rate_from_samples: no samples");
  double sum = 0.0;
  for (double s : sinr) sum += rate_term(s, t_th, t_max);
  return eta * sum / static_cast<double>(sinr.size());
}

}  // namespace mmwave_ba
