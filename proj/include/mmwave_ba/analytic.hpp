#pragma once

// Stochastic-geometry evaluation of coverage: association probabilities,
// serving-distance densities, interference Laplace-transform exponents, the
// full-reuse upper/lower bounds and the near-orthogonal (perfect alignment)
// coverage.  Also the Monte Carlo search for the smallest useful pilot reuse.

#include "mmwave_ba/antenna.hpp"
#include "mmwave_ba/beam_training.hpp"
#include "mmwave_ba/channel.hpp"
#include "mmwave_ba/config.hpp"
#include "mmwave_ba/geometry.hpp"
#include "mmwave_ba/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmwave_ba {

/// Density of Gamma(N, 1/N).
inline double gamma_pdf(double g, int n) {
  if (n < 1) throw std::invalid_argument("gamma_pdf: N must be >= 1");
  if (g < 0.0) return 0.0;
  if (g == 0.0) return n == 1 ? 1.0 : 0.0;
  return std::exp(n * std::log(static_cast<double>(n)) + (n - 1) * std::log(g) - n * g - std::lgamma(n));
}

/// F(N, x) = 1 - (1 + x)^-N.
inline double alzer_f(int n, double x) { return -std::expm1(-n * std::log1p(x)); }

/// a = N (N!)^(-1/N).
inline double alzer_a(int n) {
  if (n < 1) throw std::invalid_argument("alzer_a: N must be >= 1");
  return n * std::exp(-std::lgamma(n + 1.0) / n);
}

inline double binomial(int n, int k) { return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))); }

/// int_0^x exp(-t/mu) t dt.
inline double los_area_integral(double x, double mu) {
  const double u = x / mu;
  if (u < 1e-2) {
    // mu^2 (1 - e^-u (1 + u)) = mu^2 sum_{k>=2} (-1)^k (k-1) u^k / k!
    double term = u * u / 2.0, sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1) * term;
      term *= u / (k + 1);
    }
    return mu * mu * sum;
  }
  return mu * mu * (1.0 - std::exp(-u) * (1.0 + u));
}

/// int_0^x (1 - exp(-t/mu)) t dt.
inline double nlos_area_integral(double x, double mu) { return 0.5 * x * x - los_area_integral(x, mu); }

/// Joint density of (serving link kind, serving distance x).  Integrates to A_kind.
inline double serving_joint_density(double x, LinkKind kind, const ScenarioConfig& c) {
  if (!(x > 0.0)) return 0.0;
  const double lam = c.bs_density, mu = c.los_range;
  const double p = los_probability(x, mu);
  const double psi = exclusion_radius_psi(x, kind, c);
  if (kind == LinkKind::kLos) {
    return 2.0 * std::numbers::pi * lam * x * p *
           std::exp(-2.0 * std::numbers::pi * lam * (los_area_integral(x, mu) + nlos_area_integral(psi, mu)));
  }
  return 2.0 * std::numbers::pi * lam * x * (1.0 - p) *
         std::exp(-2.0 * std::numbers::pi * lam * (nlos_area_integral(x, mu) + los_area_integral(psi, mu)));
}

struct AssociationProbs {
  double los = 0.0;
  double nlos = 0.0;
};

namespace detail {

template <class F>
double integrate_radial(F f, double scale, double tolerance) {
  double total = 0.0, lo = 0.0;
  for (double hi : {scale, 4 * scale, 16 * scale, 64 * scale, 256 * scale}) {
    total += integrate_adaptive(f, lo, hi, tolerance);
    lo = hi;
  }
  return total + integrate_adaptive(f, lo, std::numeric_limits<double>::infinity(), tolerance);
}

}  // namespace detail

/// A_L and A_N, each integrated on its own; their sum is a check, not a constraint.
inline AssociationProbs association_probs(const ScenarioConfig& c, double tolerance = 1e-10) {
  const double rc = c.cell_radius();
  AssociationProbs a;
  a.los = detail::integrate_radial([&](double x) { return serving_joint_density(x, LinkKind::kLos, c); },
                                   std::min(rc, c.los_range), tolerance);
  a.nlos = detail::integrate_radial([&](double x) { return serving_joint_density(x, LinkKind::kNlos, c); },
                                    std::min(rc, std::max(c.los_range, 1e-3 * rc)), tolerance);
  if (std::abs(a.los + a.nlos - 1.0) > 1e-4) {
    throw std::runtime_error("association_probs: A_L + A_N = " + std::to_string(a.los + a.nlos) + ", quadrature did not converge");
  }
  return a;
}

/// Serving distance density conditioned on the serving link kind.
inline double serving_distance_pdf(double x, LinkKind kind, const ScenarioConfig& c, const AssociationProbs& a) {
  const double norm = kind == LinkKind::kLos ? a.los : a.nlos;
  if (!(norm > 0.0)) throw std::domain_error("serving_distance_pdf: association probability is zero");
  return serving_joint_density(x, kind, c) / norm;
}

inline double serving_distance_pdf(double x, LinkKind kind, const ScenarioConfig& c) {
  return serving_distance_pdf(x, kind, c, association_probs(c));
}

/// Options that reach past the textbook formulas.
struct AnalyticOptions {
  bool include_interference = true;
  /// Interferers seen through one MS sector have density lambda / N_MS.
  bool sector_thinning = true;
  /// Threshold used inside the beam-pair bracket of the lower bound: the
  /// serving sector must beat every other sector (1), or the coverage threshold T.
  bool bracket_at_unit_threshold = true;
};

/// Discretized Laplace exponent of the interference seen by a user served at
/// distance x:  U(s) = sum_i w_i F(N_i, s c_i), so that Upsilon = U(a n / tau).
class InterferenceExponent {
 public:
  InterferenceExponent(LinkKind serving, double x, const ScenarioConfig& c, const QuadratureSpec& q,
                       const AnalyticOptions& opt) {
    if (!opt.include_interference) return;
    const auto bs = build_sectored(c.n_bs_beams, c.front_to_back_constant);
    const double g_ms = static_cast<double>(c.n_ms_beams);
    const double density = c.bs_density / (opt.sector_thinning ? c.n_ms_beams : 1);
    const double b[2] = {1.0 / c.n_bs_beams, (c.n_bs_beams - 1.0) / c.n_bs_beams};
    const double gains[2] = {bs.main_gain() * g_ms, bs.side_gain() * g_ms};
    const double rc = c.cell_radius();
    auto add = [&](bool los, double lower, std::vector<double>& w, std::vector<double>& coef) {
      const double cpl = los ? c.intercept_los : c.intercept_nlos;
      const double alpha = los ? c.alpha_los : c.alpha_nlos;
      const int n = los ? c.nakagami_los : c.nakagami_nlos;
      for (const auto& node : half_line_nodes(lower, std::max(lower, rc), q.t_panels)) {
        const double t = node.x;
        const double p = los_probability(t, c.los_range);
        const double weight = 2.0 * std::numbers::pi * density * node.w * t * (los ? p : 1.0 - p);
        if (!(weight > 0.0)) continue;
        const double base = cpl * c.tx_power * std::pow(t, -alpha) / n;
        for (int k = 0; k < 2; ++k) {
          w.push_back(b[k] * weight);
          coef.push_back(base * gains[k]);
        }
      }
    };
    const double psi = exclusion_radius_psi(x, serving, c);
    if (serving == LinkKind::kLos) {
      add(true, x, w_los_, c_los_);
      add(false, psi, w_nlos_, c_nlos_);
    } else {
      add(false, x, w_nlos_, c_nlos_);
      add(true, psi, w_los_, c_los_);
    }
    n_los_ = c.nakagami_los;
    n_nlos_ = c.nakagami_nlos;
  }

  /// Exponent contributed by LOS and NLOS interferers separately.
  double los_part(double s) const { return sum(s, w_los_, c_los_, n_los_); }
  double nlos_part(double s) const { return sum(s, w_nlos_, c_nlos_, n_nlos_); }
  double operator()(double s) const { return los_part(s) + nlos_part(s); }

 private:
  static double sum(double s, const std::vector<double>& w, const std::vector<double>& coef, int n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double z = 1.0 / (1.0 + s * coef[i]);
      double zn = z;
      for (int k = 1; k < n; ++k) zn *= z;
      acc += w[i] * (1.0 - zn);
    }
    return acc;
  }

  std::vector<double> w_los_, c_los_, w_nlos_, c_nlos_;
  int n_los_ = 1, n_nlos_ = 1;
};

namespace detail {

struct ServingLink {
  double intercept, alpha;
  int nakagami;
};

inline ServingLink serving_link(LinkKind kind, const ScenarioConfig& c) {
  return kind == LinkKind::kLos ? ServingLink{c.intercept_los, c.alpha_los, c.nakagami_los}
                                : ServingLink{c.intercept_nlos, c.alpha_nlos, c.nakagami_nlos};
}

inline double serving_gain(const ScenarioConfig& c) {
  return build_sectored(c.n_bs_beams, c.front_to_back_constant).main_gain() * c.n_ms_beams;
}

inline std::vector<QuadNode> distance_nodes(LinkKind kind, const ScenarioConfig& c, const QuadratureSpec& q) {
  const double rc = c.cell_radius();
  const double scale = kind == LinkKind::kLos ? std::min(rc, c.los_range) : rc;
  const double r_max = q.radial_limit_factor * rc;
  std::vector<QuadNode> out;
  for (const auto& n : half_line_nodes(0.0, scale, q.x_panels)) {
    if (n.x > r_max) continue;
    const double w = n.w * serving_joint_density(n.x, kind, c);
    if (w > 1e-17) out.push_back({n.x, w});
  }
  return out;
}

}  // namespace detail

/// Upsilon^j_n(T, g, x) for j = 1..4 (j = 1, 2 LOS serving; j = 3, 4 NLOS
/// serving; odd j are same-kind interferers).  Returns +inf when tau <= 0.
inline double upsilon(int j, int n, double a, double t_thr, double g, double x, const ScenarioConfig& c,
                      const QuadratureSpec& q, const AnalyticOptions& opt = {}) {
  if (j < 1 || j > 4) throw std::invalid_argument("upsilon: j must be 1..4");
  const LinkKind kind = j <= 2 ? LinkKind::kLos : LinkKind::kNlos;
  const auto s = detail::serving_link(kind, c);
  const double tau = c.tx_power * detail::serving_gain(c) * g * s.intercept * std::pow(x, -s.alpha) / t_thr - c.noise_power;
  if (!(tau > 0.0)) return std::numeric_limits<double>::infinity();
  const InterferenceExponent u(kind, x, c, q, opt);
  const double arg = a * n / tau;
  const bool los_interferers = (j == 1 || j == 4);
  return los_interferers ? u.los_part(arg) : u.nlos_part(arg);
}

struct BoundDetail {
  double probability = 0.0;
  double los_part = 0.0;   // A_L P_c|L
  double nlos_part = 0.0;  // A_N P_c|N
  int alzer_terms = 0;
  bool converged = true;
  std::vector<double> by_terms;  // value for N = 1, 2, ...
};

namespace detail {

// A_kind P_c|kind of the upper bound for N = 1..n_max.
inline std::vector<double> upper_branch(LinkKind kind, double t_thr, int n_max, const ScenarioConfig& c,
                                        const QuadratureSpec& q, const AnalyticOptions& opt) {
  std::vector<double> out(static_cast<std::size_t>(n_max), 0.0);
  const auto s = serving_link(kind, c);
  const double gain = serving_gain(c);
  std::vector<double> a(static_cast<std::size_t>(n_max + 1));
  std::vector<std::vector<double>> coef(static_cast<std::size_t>(n_max + 1));
  for (int big = 1; big <= n_max; ++big) {
    a[static_cast<std::size_t>(big)] = alzer_a(big);
    for (int n = 1; n <= big; ++n) coef[static_cast<std::size_t>(big)].push_back(((n % 2) ? 1.0 : -1.0) * binomial(big, n));
  }
  for (const auto& xn : distance_nodes(kind, c, q)) {
    const double x = xn.x;
    const double k_sig = c.tx_power * gain * s.intercept * std::pow(x, -s.alpha) / t_thr;
    const double g_min = c.noise_power / k_sig;
    const double g_scale = std::max(1.0 / s.nakagami, 1.0 - g_min);
    const InterferenceExponent u(kind, x, c, q, opt);
    for (const auto& gn : half_line_nodes(g_min, g_scale, q.g_panels)) {
      const double wg = gn.w * gamma_pdf(gn.x, s.nakagami);
      if (!(wg > 1e-17)) continue;
      const double tau = k_sig * (gn.x - g_min);
      if (!(tau > 0.0)) continue;
      for (int big = 1; big <= n_max; ++big) {
        double sum = 0.0;
        const auto& cf = coef[static_cast<std::size_t>(big)];
        for (int n = 1; n <= big; ++n) sum += cf[static_cast<std::size_t>(n - 1)] * std::exp(-u(a[static_cast<std::size_t>(big)] * n / tau));
        out[static_cast<std::size_t>(big - 1)] += xn.w * wg * sum;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Full-reuse upper bound.  The dummy gamma order N grows until successive
/// values differ by less than quad.alzer_tolerance, up to quad.alzer_cap.
inline BoundDetail theorem1_upper_detail(double t_thr, const ScenarioConfig& c, const QuadratureSpec& q = {},
                                         const AnalyticOptions& opt = {}) {
  if (!(t_thr > 0.0)) throw std::domain_error("theorem1_upper: T must be > 0");
  const int cap = std::max(1, q.alzer_cap);
  const auto lv = detail::upper_branch(LinkKind::kLos, t_thr, cap, c, q, opt);
  const auto nv = detail::upper_branch(LinkKind::kNlos, t_thr, cap, c, q, opt);
  BoundDetail d;
  for (int i = 0; i < cap; ++i) d.by_terms.push_back(lv[static_cast<std::size_t>(i)] + nv[static_cast<std::size_t>(i)]);
  int pick = cap;
  d.converged = false;
  for (int i = 1; i < cap; ++i) {
    if (std::abs(d.by_terms[static_cast<std::size_t>(i)] - d.by_terms[static_cast<std::size_t>(i - 1)]) < q.alzer_tolerance) {
      pick = i + 1;
      d.converged = true;
      break;
    }
  }
  if (cap == 1) d.converged = true;
  d.alzer_terms = pick;
  d.los_part = lv[static_cast<std::size_t>(pick - 1)];
  d.nlos_part = nv[static_cast<std::size_t>(pick - 1)];
  d.probability = std::clamp(d.los_part + d.nlos_part, 0.0, 1.0);
  return d;
}

inline double theorem1_upper(double t_thr, const ScenarioConfig& c, const QuadratureSpec& q = {},
                             const AnalyticOptions& opt = {}) {
  const auto d = theorem1_upper_detail(t_thr, c, q, opt);
  if (!d.converged) {
    std::cerr << "warning: upper bound at T=" << t_thr << " did not settle within " << q.alzer_cap << " terms\n";
  }
  return d.probability;
}

namespace detail {

struct LowerParts {
  double first = 0.0;    // A_kind times the alternating sum with the noise factor
  double bracket = 1.0;  // conditional probability that the serving sector wins
};

inline LowerParts lower_branch(LinkKind kind, double t_thr, double t_bracket, bool with_bracket,
                               const ScenarioConfig& c, const QuadratureSpec& q, const AnalyticOptions& opt) {
  const auto s = serving_link(kind, c);
  const double gain = serving_gain(c);
  const double a = alzer_a(s.nakagami);
  LowerParts r;
  double bracket = 0.0, mass = 0.0;
  for (const auto& xn : distance_nodes(kind, c, q)) {
    const double x = xn.x;
    const double inv_signal = std::pow(x, s.alpha) / (c.tx_power * gain * s.intercept);
    const InterferenceExponent u(kind, x, c, q, opt);
    double first = 0.0, br = 0.0;
    for (int n = 1; n <= s.nakagami; ++n) {
      const double sign = ((n % 2) ? 1.0 : -1.0) * binomial(s.nakagami, n);
      const double sbar = a * n * t_thr * inv_signal;
      first += sign * std::exp(-sbar * c.noise_power - u(sbar));
      if (with_bracket) br += sign * std::exp(-u(a * n * t_bracket * inv_signal));
    }
    r.first += xn.w * first;
    bracket += xn.w * br;
    mass += xn.w;
  }
  if (with_bracket && mass > 0.0) r.bracket = bracket / mass;
  return r;
}

}  // namespace detail

/// Full-reuse lower bound.
inline BoundDetail theorem2_lower_detail(double t_thr, const ScenarioConfig& c, const QuadratureSpec& q = {},
                                         const AnalyticOptions& opt = {}) {
  if (!(t_thr > 0.0)) throw std::domain_error("theorem2_lower: T must be > 0");
  const bool bracket = c.n_ms_beams > 1;
  const double t_br = opt.bracket_at_unit_threshold ? 1.0 : t_thr;
  BoundDetail d;
  const auto l = detail::lower_branch(LinkKind::kLos, t_thr, t_br, bracket, c, q, opt);
  const auto n = detail::lower_branch(LinkKind::kNlos, t_thr, t_br, bracket, c, q, opt);
  const int e = c.n_ms_beams - 1;
  d.los_part = l.first * std::pow(std::clamp(l.bracket, 0.0, 1.0), e);
  d.nlos_part = n.first * std::pow(std::clamp(n.bracket, 0.0, 1.0), e);
  d.probability = std::clamp(d.los_part + d.nlos_part, 0.0, 1.0);
  d.alzer_terms = std::max(c.nakagami_los, c.nakagami_nlos);
  return d;
}

inline double theorem2_lower(double t_thr, const ScenarioConfig& c, const QuadratureSpec& q = {},
                             const AnalyticOptions& opt = {}) {
  return theorem2_lower_detail(t_thr, c, q, opt).probability;
}

/// Coverage with the serving beams perfectly aligned and co-pilot interference
/// ignored: interferers in the serving MS sector with random data beams.
inline double near_orth_coverage(double t_thr, const ScenarioConfig& c, const QuadratureSpec& q = {},
                                 const AnalyticOptions& opt = {}) {
  if (!(t_thr > 0.0)) throw std::domain_error("near_orth_coverage: T must be > 0");
  const auto l = detail::lower_branch(LinkKind::kLos, t_thr, t_thr, false, c, q, opt);
  const auto n = detail::lower_branch(LinkKind::kNlos, t_thr, t_thr, false, c, q, opt);
  return std::clamp(l.first + n.first, 0.0, 1.0);
}

struct PilotReuseResult {
  double delta_min = 1.0;
  double interference_radius = 0.0;  // R_I, pi R_I^2 lambda_c = 1
  double copilot_density = 0.0;      // lambda_c
  bool attainable = true;
};

/// Smallest co-pilot density at which the co-pilot INR in the serving MS
/// sector stays below epsilon1 with probability 1 - epsilon2.  Reuse factors are
/// compared on common drops (a BS is co-pilot iff its mark < delta), so the
/// success probability is monotone in delta and bisection is exact per sample.
inline PilotReuseResult min_pilot_reuse(const ScenarioConfig& c, std::uint64_t seed = 1, int drops = 10000,
                                        int iterations = 12) {
  PilotReuseResult r;
  auto finish = [&](double delta) {
    r.delta_min = std::clamp(delta, 0.0, 1.0);
    r.copilot_density = r.delta_min * c.bs_density;
    r.interference_radius = 1.0 / std::sqrt(std::numbers::pi * r.copilot_density);
    return r;
  };
  if (c.interference_radius > 0.0) {
    const double lc = 1.0 / (std::numbers::pi * c.interference_radius * c.interference_radius);
    r = finish(lc / c.bs_density);
    if (lc / c.bs_density <= 1.0) r.interference_radius = c.interference_radius;
    return r;
  }
  const BeamCodebooks cb = build_codebooks(c);
  // Per drop: co-pilot marks sorted ascending with cumulative INR.
  std::vector<std::vector<std::pair<double, double>>> inr(static_cast<std::size_t>(drops));
  for (int d = 0; d < drops; ++d) {
    Rng rng = make_stream(seed, 0x9157ULL, static_cast<std::uint64_t>(d));
    const Drop drop = sample_drop(c, rng);
    const BeamDecision aligned = perfect_alignment(drop, cb);
    auto& v = inr[static_cast<std::size_t>(d)];
    for (std::size_t l = 0; l < drop.size(); ++l) {
      if (l == drop.serving()) continue;
      const int beam = beam_from_mark(drop.training_beam[l], cb.bs.size());
      double p = 0.0;
      for (const Link& k : drop.links[l]) {
        p += c.tx_power * k.fading * k.path_loss * cb.ms.gain(aligned.ms_beam, k.aoa) * cb.bs.gain(beam, k.aod);
      }
      if (p > 0.0) v.emplace_back(drop.pilot_mark[l], p / c.noise_power);
    }
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) v[i].second += v[i - 1].second;
  }
  auto success = [&](double q) {
    int ok = 0;
    for (const auto& v : inr) {
      const auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(q, -1.0));
      const double total = it == v.begin() ? 0.0 : std::prev(it)->second;
      if (total < c.epsilon1) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(inr.size()) >= 1.0 - c.epsilon2;
  };
  if (success(1.0)) return finish(1.0);
  double lo = 1e-6, hi = 1.0;
  if (!success(lo)) {
    std::cerr << "warning: co-pilot INR target unattainable; using full reuse\n";
    r = finish(1.0);
    r.attainable = false;
    return r;
  }
  for (int i = 0; i < iterations; ++i) {
    const double mid = std::sqrt(lo * hi);
    (success(mid) ? lo : hi) = mid;
  }
  return finish(lo);
}

}  // namespace mmwave_ba
