#include "mmwave_ba/antenna.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mmwave_ba;
using mmwave_ba::test_util::sector_centre;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Antenna, GainModelConservesPower) {
  for (int n : {2, 3, 4, 8, 16, 64, 360}) {
    for (double c0 : {0.01, 0.1, 1.0, 5.0}) {
      const auto cb = build_sectored(n, c0);
      const double th = cb.beamwidth();
      const double total = cb.main_gain() * th / (2 * kPi) + cb.side_gain() * (2 * kPi - th) / (2 * kPi);
      EXPECT_NEAR(total, 1.0, 1e-12) << n << " " << c0;
      if (sectored_gains(th, c0).front_to_back > 1.0) {
        EXPECT_GT(cb.main_gain(), cb.side_gain());
      }
      EXPECT_GE(cb.side_gain(), 0.0);
    }
  }
}

TEST(Antenna, SixtyFourBeamGains) {
  const auto cb = build_sectored(64, 0.1);
  const double th = 2 * kPi / 64;
  const double gamma = 2 * kPi / (0.1 * (2 * kPi - th));
  EXPECT_NEAR(cb.main_gain(), 64.0 * gamma / (gamma + 1.0), 1e-12);
  EXPECT_NEAR(cb.side_gain(), (2 * kPi / (2 * kPi - th)) / (gamma + 1.0), 1e-15);
  EXPECT_NEAR(sectored_gains(th, 0.1).front_to_back, gamma, 1e-12);
}

TEST(Antenna, OmniLimit) {
  const auto g = sectored_gains(2 * kPi - 1e-6, 0.1);
  EXPECT_NEAR(g.main, 1.0, 1e-4);
  EXPECT_LT(g.side * 1e-6, 1e-4);
  EXPECT_GT(g.front_to_back, 1e6);
}

TEST(Antenna, MainGainFallsWithBeamwidth) {
  double prev = std::numeric_limits<double>::infinity();
  for (double th = 0.01; th <= kPi + 1e-12; th += 0.01) {
    const double g = sectored_gains(th, 0.1).main;
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Antenna, MsSideLobeIsZero) {
  const auto ms = build_sectored_ms(8);
  EXPECT_EQ(ms.side_gain(), 0.0);
  EXPECT_EQ(ms.main_gain(), 8.0);
  EXPECT_THROW(build_sectored(1, 0.1), std::invalid_argument);
  EXPECT_NO_THROW(build_sectored_ms(1));
}

TEST(Antenna, EffectiveGain) {
  const auto cb = build_sectored(16, 0.1);
  for (int n = 0; n < 16; ++n) {
    EXPECT_EQ(cb.gain(n, sector_centre(n, 16)), cb.main_gain());
    EXPECT_EQ(cb.gain(n, sector_centre(n, 16) + kPi), cb.side_gain());
    EXPECT_EQ(cb.gain(n, sector_centre(n, 16) - 4 * kPi), cb.main_gain());
    EXPECT_EQ(cb.gain(n, cb.sector_start(n)), cb.main_gain());
    EXPECT_EQ(cb.beam_containing(cb.sector_start(n) + cb.beamwidth()), (n + 1) % 16);
  }
  EXPECT_THROW(cb.gain(16, 0.0), std::out_of_range);
  EXPECT_THROW(cb.gain(-1, 0.0), std::out_of_range);
}

TEST(Antenna, SectorsTileTheCircle) {
  for (double ref : {0.0, 0.3, 5.9}) {
    const auto cb = build_sectored(7, 0.1, ref);
    const int samples = 10000;
    std::vector<int> hits(7, 0);
    for (int i = 0; i < samples; ++i) {
      const double phi = kTwoPi * i / samples;
      int owners = 0;
      for (int n = 0; n < 7; ++n) {
        if (cb.gain(n, phi) == cb.main_gain()) {
          ++owners;
          ++hits[static_cast<std::size_t>(n)];
        }
      }
      ASSERT_EQ(owners, 1) << phi;
    }
    double covered = 0.0;
    for (int h : hits) covered += h * kTwoPi / samples;
    EXPECT_NEAR(covered, kTwoPi, 1e-9);
  }
}

TEST(Antenna, AngularIntegralIsTwoPi) {
  const auto cb = build_sectored(12, 0.3, 0.7);
  const int samples = 120000;
  for (int n = 0; n < 12; ++n) {
    double s = 0.0;
    for (int i = 0; i < samples; ++i) s += cb.gain(n, kTwoPi * (i + 0.5) / samples);
    EXPECT_NEAR(s * kTwoPi / samples, kTwoPi, 1e-9);
  }
}

TEST(Antenna, UlaMatchedAndSingleElement) {
  const int n = 16;
  for (double phi0 : {0.0, 0.4, -1.1}) {
    auto w = ula_response(phi0, n);
    for (auto& v : w) v /= std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(ula_gain(w, phi0, n), n, 1e-10);
  }
  const Weights one{1.0};
  for (double phi : {0.0, 1.0, 2.5}) EXPECT_NEAR(ula_gain(one, phi, 1), 1.0, 1e-15);
}

TEST(Antenna, UlaNull) {
  const int n = 8;
  auto w = ula_response(0.0, n);
  for (auto& v : w) v /= std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(ula_gain(w, std::asin(2.0 / n), n), 0.0, 1e-12);
}

TEST(Antenna, UlaCodebookWeightsAreUnitNorm) {
  const auto cb = build_ula(16, 24);
  for (const auto& w : cb.weights()) {
    double s = 0.0;
    for (const auto& v : w) s += std::norm(v);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  // closed form matches the explicit inner product
  for (int b = 0; b < cb.size(); ++b) {
    for (double phi = 0.0; phi < kTwoPi; phi += 0.37) {
      EXPECT_NEAR(cb.gain(b, phi), ula_gain(cb.weights()[static_cast<std::size_t>(b)], phi, 16), 1e-9);
    }
  }
}

TEST(Antenna, UlaEnergyConservation) {
  const auto cb = build_ula(16, 16);
  for (int b = 0; b < cb.size(); ++b) {
    double s = 0.0;
    // uniform in u = sin(phi); midpoint rule is exact for this trig polynomial
    for (int i = 0; i < 4096; ++i) s += cb.gain(b, std::asin(-1.0 + 2.0 * (i + 0.5) / 4096));
    EXPECT_NEAR(s / 4096, 1.0, 1e-9);
  }
}

TEST(Antenna, CodebookAccumulateMatchesGain) {
  for (const Codebook& cb : {Codebook(build_sectored(8, 0.1)), Codebook(build_sectored_ms(4)), Codebook(build_ula(8, 8))}) {
    for (double phi = 0.05; phi < kTwoPi; phi += 0.41) {
      std::vector<double> acc(static_cast<std::size_t>(cb.size()), 0.0);
      cb.accumulate(phi, 2.5, acc);
      for (int b = 0; b < cb.size(); ++b) EXPECT_NEAR(acc[static_cast<std::size_t>(b)], 2.5 * cb.gain(b, phi), 1e-12);
      const int best = cb.best_beam(phi);
      for (int b = 0; b < cb.size(); ++b) EXPECT_LE(cb.gain(b, phi), cb.gain(best, phi));
    }
  }
}
