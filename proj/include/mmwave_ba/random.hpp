#pragma once

// Random streams.  Every drop owns an independent mt19937_64 seeded from
// (seed, point, drop), so results do not depend on how drops are scheduled.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mmwave_ba {

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, std::uint64_t point = 0, std::uint64_t drop = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(point), hi(point), lo(drop), hi(drop), 0x6d6d5761u};
  return Rng(seq);
}

/// Uniform on the open interval (0, 1); safe to take the log of.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform on [0, 2 pi).
inline double uniform_angle(Rng& rng) {
  const double a = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
  return a < 2.0 * std::numbers::pi ? a : 0.0;
}

inline int uniform_index(Rng& rng, int n) {
  return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

/// Wraps an angle into [0, 2 pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

}  // namespace mmwave_ba
