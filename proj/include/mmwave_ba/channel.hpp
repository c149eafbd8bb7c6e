#pragma once

// Per-BS links (fading, angles, path gain) and the full per-drop state shared
// by the training and data phases of one coherence block.

#include "mmwave_ba/config.hpp"
#include "mmwave_ba/geometry.hpp"
#include "mmwave_ba/random.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mmwave_ba {

struct Link {
  std::size_t bs_index = 0;
  double fading = 1.0;     // h, unit mean
  double aod = 0.0;        // BS-local frame
  double aoa = 0.0;        // MS frame
  double path_loss = 0.0;  // rho
  bool is_los = false;
};

struct MultipathLink {
  std::array<Link, 3> clusters{};
  int count = 1;

  const Link* begin() const { return clusters.data(); }
  const Link* end() const { return clusters.data() + count; }
};

/// Gamma(N, 1/N) draw.  For integer N this is -(1/N) ln(prod u_i).
inline double sample_fading(int nakagami, Rng& rng) {
  if (nakagami < 1) throw std::invalid_argument("sample_fading: Nakagami parameter must be >= 1");
  double prod = 1.0;
  double log_sum = 0.0;
  for (int i = 0; i < nakagami; ++i) {
    prod *= uniform_open(rng);
    if (prod < 1e-250) {
      log_sum += std::log(prod);
      prod = 1.0;
    }
  }
  return -(log_sum + std::log(prod)) / nakagami;
}

inline Link sample_link(std::size_t bs_index, const BsPoint& bs, const ScenarioConfig& config, Rng& rng) {
  Link l;
  l.bs_index = bs_index;
  l.is_los = bs.is_los;
  l.fading = sample_fading(bs.is_los ? config.nakagami_los : config.nakagami_nlos, rng);
  l.aod = uniform_angle(rng);
  l.aoa = uniform_angle(rng);
  l.path_loss = path_loss(bs.distance, bs.is_los, config);
  return l;
}

/// Clusters with independent angles and fading, equal mean power summing to rho.
/// Cluster 0 inherits the BS blockage state; the others are NLOS.
inline MultipathLink sample_multipath(std::size_t bs_index, const BsPoint& bs, const ScenarioConfig& config, Rng& rng) {
  MultipathLink m;
  m.count = config.n_clusters;
  const double rho = path_loss(bs.distance, bs.is_los, config);
  for (int k = 0; k < m.count; ++k) {
    Link& l = m.clusters[static_cast<std::size_t>(k)];
    l.bs_index = bs_index;
    l.is_los = k == 0 && bs.is_los;
    l.fading = sample_fading(l.is_los ? config.nakagami_los : config.nakagami_nlos, rng);
    l.aod = uniform_angle(rng);
    l.aoa = uniform_angle(rng);
    l.path_loss = rho / m.count;
  }
  return m;
}

/// Everything random about one coherence block.  Pilot and beam choices are
/// stored as uniform marks so that different reuse factors and codebook sizes
/// can be evaluated on the same drop.
struct Drop {
  NetworkRealization network;
  std::vector<MultipathLink> links;
  std::vector<double> pilot_mark;       // co-pilot iff mark < delta
  std::vector<double> pilot_mark_wide;  // same, stage-1 of hierarchical search
  std::vector<double> training_beam;    // interferer beam during training, index floor(mark * N)
  std::vector<double> data_beam;        // interferer beam during data; equals training_beam unless redrawn
  int resampled = 0;

  std::size_t serving() const { return network.serving_index; }
  std::size_t size() const { return links.size(); }
};

inline int beam_from_mark(double mark, int n_beams) {
  const int b = static_cast<int>(mark * n_beams);
  return b < n_beams ? b : n_beams - 1;
}

inline Drop make_drop(NetworkRealization network, const ScenarioConfig& config, Rng& rng) {
  Drop d;
  d.network = std::move(network);
  const std::size_t n = d.network.size();
  d.links.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (config.paths == PathModel::kMultipath) {
      d.links.push_back(sample_multipath(i, d.network.bs[i], config, rng));
    } else {
      MultipathLink m;
      m.clusters[0] = sample_link(i, d.network.bs[i], config, rng);
      d.links.push_back(m);
    }
  }
  d.pilot_mark.resize(n);
  d.pilot_mark_wide.resize(n);
  d.training_beam.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.pilot_mark[i] = uniform_open(rng);
    d.pilot_mark_wide[i] = uniform_open(rng);
    d.training_beam[i] = uniform_open(rng);
  }
  if (config.redraw_data_beams) {
    d.data_beam.resize(n);
    for (auto& b : d.data_beam) b = uniform_open(rng);
  } else {
    d.data_beam = d.training_beam;
  }
  return d;
}

inline Drop sample_drop(const ScenarioConfig& config, Rng& rng) {
  int resampled = 0;
  auto net = sample_network(config, rng, &resampled);
  Drop d = make_drop(std::move(net), config, rng);
  d.resampled = resampled;
  return d;
}

/// The same drop seen through a smaller window: BSs beyond `radius` removed and
/// the user re-associated.  Returns false when nothing is left.
inline bool restrict_drop(const Drop& in, double radius, Drop& out) {
  out = Drop{};
  out.resampled = in.resampled;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in.network.bs[i].distance > radius) continue;
    const std::size_t j = out.links.size();
    out.network.bs.push_back(in.network.bs[i]);
    out.network.path_loss.push_back(in.network.path_loss[i]);
    MultipathLink m = in.links[i];
    for (auto& c : m.clusters) c.bs_index = j;
    out.links.push_back(m);
    out.pilot_mark.push_back(in.pilot_mark[i]);
    out.pilot_mark_wide.push_back(in.pilot_mark_wide[i]);
    out.training_beam.push_back(in.training_beam[i]);
    out.data_beam.push_back(in.data_beam[i]);
  }
  if (out.links.empty()) return false;
  out.network.serving_index = *associate(out.network);
  return true;
}

}  // namespace mmwave_ba
