#include "mmwave_ba/channel.hpp"

#include "test_util.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace mmwave_ba;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::vector<double> fading_draws(int n, int count, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  std::vector<double> v(static_cast<std::size_t>(count));
  for (auto& x : v) x = sample_fading(n, rng);
  return v;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST(Channel, FadingMeanAndVariance) {
  EXPECT_NEAR(mean(fading_draws(2, 1000000, 1)), 1.0, 0.003);
  EXPECT_NEAR(variance(fading_draws(3, 1000000, 2)), 1.0 / 3.0, 0.01);
  EXPECT_THROW(
      {
        Rng rng = make_stream(1);
        sample_fading(0, rng);
      },
      std::invalid_argument);
}

TEST(Channel, UnitShapeFadingIsExponential) {
  auto v = fading_draws(1, 100000, 3);
  std::sort(v.begin(), v.end());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = 1.0 - std::exp(-v[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / v.size()), std::abs(f - static_cast<double>(i + 1) / v.size())});
  }
  EXPECT_LT(d, 0.01);
}

TEST(Channel, AnglesAreUniform) {
  ScenarioConfig c;
  Rng rng = make_stream(4);
  BsPoint bs{{30.0, 40.0}, 50.0, true, 0.0};
  const int bins = 36, n = 100000;
  std::vector<double> aod(bins, 0.0), aoa(bins, 0.0);
  for (int i = 0; i < n; ++i) {
    const Link l = sample_link(0, bs, c, rng);
    ASSERT_GE(l.aod, 0.0);
    ASSERT_LT(l.aod, kTwoPi);
    aod[static_cast<std::size_t>(l.aod / kTwoPi * bins)] += 1;
    aoa[static_cast<std::size_t>(l.aoa / kTwoPi * bins)] += 1;
  }
  const double crit = boost::math::quantile(boost::math::complement(boost::math::chi_squared(bins - 1), 0.01));
  for (const auto* h : {&aod, &aoa}) {
    double chi = 0.0;
    for (double o : *h) chi += (o - n / double(bins)) * (o - n / double(bins)) / (n / double(bins));
    EXPECT_LT(chi, crit);
  }
}

TEST(Channel, LinkUsesKindSpecificFading) {
  ScenarioConfig c;
  c.nakagami_los = 2;
  c.nakagami_nlos = 5;
  Rng rng = make_stream(5);
  const BsPoint los{{10.0, 0.0}, 10.0, true, 0.0};
  const BsPoint nlos{{10.0, 0.0}, 10.0, false, 0.0};
  std::vector<double> a, b;
  for (int i = 0; i < 100000; ++i) {
    a.push_back(sample_link(0, los, c, rng).fading);
    b.push_back(sample_link(0, nlos, c, rng).fading);
  }
  EXPECT_NEAR(variance(a), 0.5, 0.015);
  EXPECT_NEAR(variance(b), 0.2, 0.006);
  const Link l = sample_link(3, nlos, c, rng);
  EXPECT_EQ(l.path_loss, path_loss(10.0, false, c));
  EXPECT_EQ(l.bs_index, 3u);
  EXPECT_FALSE(l.is_los);
}

TEST(Channel, MultipathClusters) {
  ScenarioConfig c;
  c.paths = PathModel::kMultipath;
  c.n_clusters = 3;
  Rng rng = make_stream(6);
  const BsPoint bs{{0.0, 70.0}, 70.0, true, 0.0};
  for (int i = 0; i < 100; ++i) {
    const auto m = sample_multipath(0, bs, c, rng);
    ASSERT_EQ(m.count, 3);
    double total = 0.0;
    for (const Link& k : m) total += k.path_loss;
    EXPECT_NEAR(total / path_loss(70.0, true, c), 1.0, 1e-12);
    EXPECT_TRUE(m.clusters[0].is_los);
    EXPECT_FALSE(m.clusters[1].is_los);
  }
}

TEST(Channel, SingleClusterMatchesSinglePath) {
  ScenarioConfig c;
  c.paths = PathModel::kMultipath;
  c.n_clusters = 1;
  Rng r1 = make_stream(7), r2 = make_stream(8);
  const BsPoint bs{{0.0, 40.0}, 40.0, true, 0.0};
  std::vector<double> a, b;
  for (int i = 0; i < 50000; ++i) {
    const auto m = sample_multipath(0, bs, c, r1);
    a.push_back(m.clusters[0].fading * m.clusters[0].path_loss);
    const auto l = sample_link(0, bs, c, r2);
    b.push_back(l.fading * l.path_loss);
  }
  // two-sample KS critical value at 1%: 1.63 sqrt(2/n)
  EXPECT_LT(ks_two_sample(a, b), 1.63 * std::sqrt(2.0 / 50000));
}

TEST(Channel, MatchedSectoredPowerIdentity) {
  ScenarioConfig c;
  const auto bs = build_sectored(64, 0.1);
  const auto ms = build_sectored_ms(8);
  const auto d = test_util::hand_drop({{20.0, 0.0, true, 0.7, 1.0, 2.0}}, c);
  const Link& l = d.links[0].clusters[0];
  const double rx = c.tx_power * l.fading * l.path_loss * bs.gain(bs.beam_containing(1.0), l.aod) *
                    ms.gain(ms.beam_containing(2.0), l.aoa);
  EXPECT_NEAR(rx / (c.tx_power * 0.7 * l.path_loss * bs.main_gain() * ms.main_gain()), 1.0, 1e-15);
}

TEST(Channel, FadingIndependentAcrossLinks) {
  ScenarioConfig c;
  std::vector<double> a, b;
  for (int i = 0; i < 100000; ++i) {
    Rng rng = make_stream(9, 0, static_cast<std::uint64_t>(i));
    const Drop d = sample_drop(c, rng);
    if (d.size() < 2) continue;
    a.push_back(d.links[0].clusters[0].fading);
    b.push_back(d.links[1].clusters[0].fading);
  }
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.01);
}

TEST(Channel, DropMarksAndRestriction) {
  ScenarioConfig c;
  Rng rng = make_stream(10);
  const Drop d = sample_drop(c, rng);
  ASSERT_EQ(d.pilot_mark.size(), d.size());
  ASSERT_EQ(d.data_beam, d.training_beam);
  for (double m : d.pilot_mark) {
    EXPECT_GT(m, 0.0);
    EXPECT_LT(m, 1.0);
  }
  EXPECT_EQ(beam_from_mark(0.0, 8), 0);
  EXPECT_EQ(beam_from_mark(0.999999, 8), 7);
  EXPECT_EQ(beam_from_mark(0.5, 8), 4);
  Drop small;
  ASSERT_TRUE(restrict_drop(d, 300.0, small));
  for (const auto& b : small.network.bs) EXPECT_LE(b.distance, 300.0);
  EXPECT_EQ(small.links[small.serving()].clusters[0].path_loss, small.network.path_loss[small.serving()]);
  Drop full;
  ASSERT_TRUE(restrict_drop(d, 1e9, full));
  EXPECT_EQ(full.size(), d.size());
  EXPECT_EQ(full.serving(), d.serving());

  ScenarioConfig redraw = c;
  redraw.redraw_data_beams = true;
  Rng r2 = make_stream(10);
  const Drop e = sample_drop(redraw, r2);
  EXPECT_NE(e.data_beam, e.training_beam);
}
