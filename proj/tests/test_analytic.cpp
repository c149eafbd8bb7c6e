#include "mmwave_ba/analytic.hpp"

#include "mmwave_ba/sim_engine.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace mmwave_ba;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> coarse_grid() {
  std::vector<double> t;
  for (double db = -10.0; db <= 30.0 + 1e-9; db += 5.0) t.push_back(db_to_linear(db));
  return t;
}

}  // namespace

TEST(Analytic, GammaPdf) {
  EXPECT_NEAR(gamma_pdf(0.0, 1), 1.0, 1e-15);
  EXPECT_NEAR(gamma_pdf(1.0, 2), 4.0 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(gamma_pdf(1.0, 2), 0.5413, 1e-4);
  for (int n : {1, 2, 3, 5}) {
    const double s = integrate_adaptive([n](double g) { return gamma_pdf(g, n); }, 0.0,
                                        std::numeric_limits<double>::infinity(), 1e-12);
    EXPECT_NEAR(s, 1.0, 1e-8) << n;
  }
}

TEST(Analytic, AlzerF) {
  EXPECT_EQ(alzer_f(3, 0.0), 0.0);
  EXPECT_NEAR(alzer_f(1, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(alzer_f(2, 1e9), 1.0, 1e-8);
  for (int n : {1, 2, 5}) {
    for (double x : {0.3, 7.0}) EXPECT_NEAR(alzer_f(n, x), 1.0 - std::pow(1.0 + x, -n), 1e-12);
    const double x = 1e-9;
    EXPECT_NEAR(alzer_f(n, x), n * x - 0.5 * n * (n + 1) * x * x, 1e-12 * n * x);
  }
}

TEST(Analytic, AlzerA) {
  EXPECT_NEAR(alzer_a(1), 1.0, 1e-15);
  EXPECT_NEAR(alzer_a(2), std::sqrt(2.0), 1e-14);
  for (int n = 1; n <= 12; ++n) {
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    EXPECT_NEAR(alzer_a(n) / (n * std::pow(fact, -1.0 / n)), 1.0, 1e-8) << n;
  }
  EXPECT_NEAR(alzer_a(10), 2.2081252, 1e-6);
}

TEST(Analytic, AssociationLimits) {
  ScenarioConfig all_los;
  all_los.los_range = 1e6 * all_los.cell_radius();
  EXPECT_NEAR(association_probs(all_los).los, 1.0, 1e-3);
  ScenarioConfig all_nlos;
  all_nlos.los_range = 1e-3 * all_nlos.cell_radius();
  EXPECT_NEAR(association_probs(all_nlos).nlos, 1.0, 1e-3);
}

TEST(Analytic, AssociationMatchesSimulation) {
  for (double mu : {50.0, 100.0, 200.0}) {
    ScenarioConfig c;
    c.los_range = mu;
    const auto a = association_probs(c);
    EXPECT_NEAR(a.los + a.nlos, 1.0, 1e-6);
    const int drops = 100000;
    int los = 0;
    for (int i = 0; i < drops; ++i) {
      Rng rng = make_stream(21, static_cast<std::uint64_t>(mu), static_cast<std::uint64_t>(i));
      const auto net = sample_network(c, rng);
      los += net.bs[net.serving_index].is_los;
    }
    EXPECT_NEAR(static_cast<double>(los) / drops, a.los, 0.01) << "mu " << mu;
  }
}

TEST(Analytic, ServingDistancePdf) {
  ScenarioConfig c;
  const auto a = association_probs(c);
  for (auto kind : {LinkKind::kLos, LinkKind::kNlos}) {
    const double s = integrate_adaptive([&](double x) { return serving_distance_pdf(x, kind, c, a); }, 0.0, 500.0, 1e-12) +
                     integrate_adaptive([&](double x) { return serving_distance_pdf(x, kind, c, a); }, 500.0,
                                        std::numeric_limits<double>::infinity(), 1e-12);
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Analytic, ServingDistanceHistogram) {
  ScenarioConfig c;
  const auto a = association_probs(c);
  const int bins = 20;
  const double width = 6.0;  // 0..120 m, last bin open
  std::vector<double> counts(bins, 0.0);
  double total = 0.0;
  for (int i = 0; i < 100000; ++i) {
    Rng rng = make_stream(22, 0, static_cast<std::uint64_t>(i));
    const auto net = sample_network(c, rng);
    const auto& b = net.bs[net.serving_index];
    if (!b.is_los) continue;
    counts[static_cast<std::size_t>(std::min(bins - 1.0, std::floor(b.distance / width)))] += 1;
    total += 1;
  }
  double chi = 0.0;
  for (int k = 0; k < bins; ++k) {
    const double lo = k * width;
    const double hi = k == bins - 1 ? std::numeric_limits<double>::infinity() : lo + width;
    const double p = integrate_adaptive([&](double x) { return serving_distance_pdf(x, LinkKind::kLos, c, a); }, lo, hi, 1e-12);
    const double e = p * total;
    chi += (counts[static_cast<std::size_t>(k)] - e) * (counts[static_cast<std::size_t>(k)] - e) / e;
  }
  EXPECT_LT(chi, boost::math::quantile(boost::math::complement(boost::math::chi_squared(bins - 1), 0.01)));
}

TEST(Analytic, ServingDistanceRayleighLimit) {
  ScenarioConfig c;
  c.los_range = 1e9;
  const double lam = c.bs_density;
  double worst = 0.0;
  const auto a = association_probs(c);
  for (double x = 0.5; x <= 4 * c.cell_radius(); x += 0.5) {
    const double ray = 2 * kPi * lam * x * std::exp(-kPi * lam * x * x);
    worst = std::max(worst, std::abs(serving_distance_pdf(x, LinkKind::kLos, c, a) - ray));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Analytic, UpsilonLimits) {
  ScenarioConfig c;
  const QuadratureSpec q;
  ScenarioConfig sparse = c;
  sparse.bs_density = 1e-30;
  for (int j = 1; j <= 4; ++j) {
    EXPECT_LT(upsilon(j, 1, 1.0, 1.0, 1.0, 20.0, sparse, q), 1e-20);
    EXPECT_LT(upsilon(j, 1, 1.0, 1e-12, 1.0, 20.0, c, q), 1e-6);
    EXPECT_GE(upsilon(j, 2, alzer_a(3), 10.0, 0.7, 40.0, c, q), 0.0);
  }
  // tau <= 0
  EXPECT_TRUE(std::isinf(upsilon(1, 1, 1.0, 1e6, 1e-3, 500.0, c, q)));
  EXPECT_THROW(upsilon(5, 1, 1.0, 1.0, 1.0, 1.0, c, q), std::invalid_argument);
}

TEST(Analytic, UpsilonMatchesRiemannSum) {
  ScenarioConfig c;
  const QuadratureSpec q;
  const double x = c.cell_radius(), g = 1.0, t_thr = 1.0, a = 1.0;
  const int n = 1;
  const auto bs = build_sectored(c.n_bs_beams, c.front_to_back_constant);
  const double g_serv = bs.main_gain() * c.n_ms_beams;
  const double b[2] = {1.0 / c.n_bs_beams, (c.n_bs_beams - 1.0) / c.n_bs_beams};
  const double gk[2] = {bs.main_gain() * c.n_ms_beams, bs.side_gain() * c.n_ms_beams};
  for (int j = 1; j <= 4; ++j) {
    const bool serving_los = j <= 2;
    const bool interferer_los = j == 1 || j == 4;
    const double cs = serving_los ? c.intercept_los : c.intercept_nlos;
    const double as = serving_los ? c.alpha_los : c.alpha_nlos;
    const double tau = c.tx_power * g_serv * g * cs * std::pow(x, -as) / t_thr - c.noise_power;
    const double ci = interferer_los ? c.intercept_los : c.intercept_nlos;
    const double ai = interferer_los ? c.alpha_los : c.alpha_nlos;
    const int ni = interferer_los ? c.nakagami_los : c.nakagami_nlos;
    const double lower = serving_los == interferer_los ? x : exclusion_radius_psi(x, serving_los ? LinkKind::kLos : LinkKind::kNlos, c);
    // midpoint rule in log t from `lower` to 1e5 `lower`
    const int panels = 200000;
    const double l0 = std::log(lower), l1 = std::log(lower * 1e5);
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
      const double t = std::exp(l0 + (i + 0.5) * (l1 - l0) / panels);
      const double p = std::exp(-t / c.los_range);
      const double w = interferer_los ? p : 1.0 - p;
      double f = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double y = a * n * ci * c.tx_power * gk[k] * std::pow(t, -ai) / (tau * ni);
        f += b[k] * (1.0 - std::pow(1.0 + y, -ni));
      }
      sum += f * t * w * t;  // dt = t dlog t
    }
    const double oracle = 2 * kPi * c.bs_density / c.n_ms_beams * sum * (l1 - l0) / panels;
    const double v = upsilon(j, n, a, t_thr, g, x, c, q);
    EXPECT_NEAR(v / oracle, 1.0, 1e-4) << "j=" << j;
  }
}

TEST(Analytic, BoundsAreProbabilitiesAndMonotone) {
  ScenarioConfig c;
  const auto t = coarse_grid();
  double pu = 1.0, pl = 1.0, pn = 1.0;
  for (double v : t) {
    const double u = theorem1_upper_detail(v, c).probability;
    const double l = theorem2_lower(v, c);
    const double n = near_orth_coverage(v, c);
    for (double p : {u, l, n}) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
    EXPECT_LE(u, pu + 1e-12);
    EXPECT_LE(l, pl + 1e-12);
    EXPECT_LE(n, pn + 1e-12);
    pu = u;
    pl = l;
    pn = n;
  }
  EXPECT_THROW(theorem1_upper(0.0, c), std::domain_error);
  EXPECT_THROW(theorem2_lower(-1.0, c), std::domain_error);
}

TEST(Analytic, LiteralBracketLowerStaysBelowUpper) {
  ScenarioConfig c;
  AnalyticOptions literal;
  literal.bracket_at_unit_threshold = false;
  for (double v : coarse_grid()) {
    EXPECT_LE(theorem2_lower(v, c, {}, literal), theorem1_upper_detail(v, c).probability + 1e-6) << linear_to_db(v);
    // the literal bracket is never larger than the unit one above 0 dB
    if (v >= 1.0) {
      EXPECT_LE(theorem2_lower(v, c, {}, literal), theorem2_lower(v, c) + 1e-12);
    }
  }
}

TEST(Analytic, SingleCombinerHasNoBracket) {
  ScenarioConfig c;
  c.n_ms_beams = 1;
  for (double v : {0.5, 10.0, 300.0}) EXPECT_EQ(theorem2_lower(v, c), near_orth_coverage(v, c));
}

TEST(Analytic, NoiseOnlyUpperBoundMatchesSimulation) {
  ScenarioConfig c;
  c.set_cell_radius(150.0);
  AnalyticOptions no_interference;
  no_interference.include_interference = false;
  const auto cb = build_codebooks(c);
  const int drops = 50000;
  std::vector<double> snr;
  for (int i = 0; i < drops; ++i) {
    Rng rng = make_stream(23, 0, static_cast<std::uint64_t>(i));
    const Drop d = sample_drop(c, rng);
    const Link& l = d.links[d.serving()].clusters[0];
    snr.push_back(c.tx_power * cb.bs.sectored().main_gain() * c.n_ms_beams * l.fading * l.path_loss / c.noise_power);
  }
  for (double db : {0.0, 10.0, 20.0}) {
    const double t = db_to_linear(db);
    const double sim = coverage_from_samples(snr, {t}).coverage[0];
    EXPECT_NEAR(theorem1_upper(t, c, {}, no_interference), sim, 0.01) << db;
  }
}

TEST(Analytic, NearOrthogonalLimits) {
  ScenarioConfig c;
  EXPECT_NEAR(near_orth_coverage(1e-6, c), 1.0, 1e-3);
}

TEST(Analytic, NearOrthogonalTracksPerfectAlignment) {
  ScenarioConfig c;
  std::vector<double> t{db_to_linear(0.0), db_to_linear(10.0), db_to_linear(20.0)};
  const auto sim = coverage_estimate(AssociationMode::kPerfect, t, 20000, c, 4);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(near_orth_coverage(t[i], c), sim.curve.coverage[i], 0.02);
}

TEST(Analytic, AlzerCapRobustness) {
  ScenarioConfig c;
  QuadratureSpec wide_cap;
  wide_cap.alzer_cap = 15;
  for (double db : {-10.0, 0.0, 10.0, 20.0, 30.0}) {
    const double t = db_to_linear(db);
    EXPECT_LT(std::abs(theorem1_upper_detail(t, c).probability - theorem1_upper_detail(t, c, wide_cap).probability), 1e-3) << db;
  }
}

TEST(Analytic, QuadratureRobustness) {
  ScenarioConfig c;
  const QuadratureSpec q;
  const auto r = q.refined();
  for (double db : {0.0, 15.0, 30.0}) {
    const double t = db_to_linear(db);
    EXPECT_LT(std::abs(theorem1_upper_detail(t, c, q).probability - theorem1_upper_detail(t, c, r).probability), 1e-3);
    EXPECT_LT(std::abs(theorem2_lower(t, c, q) - theorem2_lower(t, c, r)), 1e-3);
    EXPECT_LT(std::abs(near_orth_coverage(t, c, q) - near_orth_coverage(t, c, r)), 1e-3);
  }
}

TEST(Analytic, MinPilotReuse) {
  ScenarioConfig c;
  ScenarioConfig loose = c;
  loose.epsilon1 = 1e6;
  const auto all = min_pilot_reuse(loose, 1, 2000);
  EXPECT_EQ(all.delta_min, 1.0);
  const auto a = min_pilot_reuse(c, 1);
  const auto b = min_pilot_reuse(c, 2);
  EXPECT_GT(a.delta_min, 0.0);
  EXPECT_LT(a.delta_min, 1.0);
  EXPECT_NEAR(b.delta_min / a.delta_min, 1.0, 0.2);
  EXPECT_NEAR(a.interference_radius * std::sqrt(kPi * a.copilot_density), 1.0, 1e-12);
  EXPECT_NEAR(a.copilot_density, a.delta_min * c.bs_density, 1e-18);
  ScenarioConfig fixed = c;
  fixed.interference_radius = 200.0;
  const auto f = min_pilot_reuse(fixed);
  EXPECT_NEAR(f.delta_min, 1.0 / (kPi * 200.0 * 200.0 * c.bs_density), 1e-12);
  EXPECT_EQ(f.interference_radius, 200.0);
}
