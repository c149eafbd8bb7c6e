#pragma once

// BS point process, blockage, path loss and cell association for the typical
// user at the origin.

#include "mmwave_ba/config.hpp"
#include "mmwave_ba/random.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace mmwave_ba {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct BsPoint {
  Point2 position;
  double distance = 0.0;  // from the origin
  bool is_los = false;
  double array_orientation = 0.0;
};

struct NetworkRealization {
  std::vector<BsPoint> bs;
  std::vector<double> path_loss;  // linear path gain C r^-alpha per BS
  std::size_t serving_index = 0;

  std::size_t size() const { return bs.size(); }
  bool empty() const { return bs.empty(); }
};

enum class LinkKind { kLos, kNlos };

/// Homogeneous PPP restricted to a disc centred on the origin.
inline std::vector<Point2> sample_ppp(double density, double window_radius, Rng& rng) {
  if (density < 0.0) throw std::invalid_argument("sample_ppp: negative density");
  if (!(window_radius > 0.0)) throw std::invalid_argument("sample_ppp: window radius must be > 0");
  std::vector<Point2> points;
  const double mean = density * std::numbers::pi * window_radius * window_radius;
  if (mean <= 0.0) return points;
  const auto count = std::poisson_distribution<long>(mean)(rng);
  points.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double r = window_radius * std::sqrt(uniform_open(rng));
    const double theta = uniform_angle(rng);
    points.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return points;
}

inline double los_probability(double distance, double los_range) { return std::exp(-distance / los_range); }

/// Independent Bernoulli blockage, P(LOS) = exp(-r / mu).
inline std::vector<bool> assign_los(const std::vector<Point2>& points, double los_range, Rng& rng) {
  if (!(los_range > 0.0)) throw std::invalid_argument("assign_los: los_range must be > 0");
  std::vector<bool> los(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = std::hypot(points[i].x, points[i].y);
    los[i] = uniform_open(rng) < los_probability(r, los_range);
  }
  return los;
}

inline double path_loss(double distance, bool is_los, const ScenarioConfig& config) {
  if (!(distance > 0.0)) throw std::domain_error("path_loss: distance must be > 0");
  return is_los ? config.intercept_los * std::pow(distance, -config.alpha_los)
                : config.intercept_nlos * std::pow(distance, -config.alpha_nlos);
}

/// Index of the BS with the largest path gain; ties go to the smaller index.
/// An empty network yields no serving BS.
inline std::optional<std::size_t> associate(const NetworkRealization& net) {
  if (net.path_loss.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < net.path_loss.size(); ++i) {
    if (net.path_loss[i] > net.path_loss[best]) best = i;
  }
  return best;
}

/// Minimum distance at which a BS of the other link kind matches the path gain
/// of a serving BS of kind `kind` at distance x.
inline double exclusion_radius_psi(double x, LinkKind kind, const ScenarioConfig& c) {
  if (!(x > 0.0)) throw std::domain_error("exclusion_radius_psi: x must be > 0");
  if (kind == LinkKind::kLos) {
    return std::pow(c.intercept_nlos / c.intercept_los, 1.0 / c.alpha_nlos) * std::pow(x, c.alpha_los / c.alpha_nlos);
  }
  return std::pow(c.intercept_los / c.intercept_nlos, 1.0 / c.alpha_los) * std::pow(x, c.alpha_nlos / c.alpha_los);
}

/// Builds a realization from explicit BS positions and LOS states.
inline NetworkRealization make_network(const std::vector<Point2>& points, const std::vector<bool>& los,
                                       const std::vector<double>& orientation, const ScenarioConfig& config) {
  NetworkRealization net;
  net.bs.reserve(points.size());
  net.path_loss.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    BsPoint b;
    b.position = points[i];
    b.distance = std::hypot(points[i].x, points[i].y);
    b.is_los = los[i];
    b.array_orientation = i < orientation.size() ? orientation[i] : 0.0;
    net.bs.push_back(b);
    net.path_loss.push_back(path_loss(b.distance, b.is_los, config));
  }
  net.serving_index = associate(net).value_or(0);
  return net;
}

/// One non-empty network drop; `resampled` counts the empty windows discarded.
inline NetworkRealization sample_network(const ScenarioConfig& config, Rng& rng, int* resampled = nullptr) {
  const double window = config.window_radius();
  for (int attempt = 0;; ++attempt) {
    auto points = sample_ppp(config.bs_density, window, rng);
    if (points.empty()) {
      if (attempt > 1000000) throw std::runtime_error("sample_network: window is always empty");
      if (resampled) ++*resampled;
      continue;
    }
    auto los = assign_los(points, config.los_range, rng);
    std::vector<double> orientation(points.size());
    for (auto& o : orientation) o = uniform_angle(rng);
    return make_network(points, los, orientation, config);
  }
}

}  // namespace mmwave_ba
