#pragma once

// Initial beam association: pilot-reuse thinning, control SNR, exhaustive and
// hierarchical max-SNR sweeps, and the perfect-alignment reference.

#include "mmwave_ba/antenna.hpp"
#include "mmwave_ba/channel.hpp"
#include "mmwave_ba/config.hpp"
#include "mmwave_ba/random.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmwave_ba {

enum class Alignment { kObp, kSbp, kMiss };

inline const char* to_string(Alignment a) {
  switch (a) {
    case Alignment::kObp: return "OBP";
    case Alignment::kSbp: return "SBP";
    case Alignment::kMiss: return "MISS";
  }
  return "?";
}

struct BeamDecision {
  int bs_beam = 0;
  int ms_beam = 0;
  Alignment alignment = Alignment::kMiss;
};

struct PilotPartition {
  std::vector<std::size_t> copilot_indices;
  std::vector<std::size_t> orthogonal_indices;
};

struct BeamCodebooks {
  Codebook bs;
  Codebook ms;
};

/// Data-phase (narrow) codebooks for the configured antenna model.
inline BeamCodebooks build_codebooks(const ScenarioConfig& c) {
  if (c.antenna == AntennaModel::kUla) {
    return {build_ula(c.bs_antennas, c.n_bs_beams), build_ula(c.ms_antennas, c.n_ms_beams)};
  }
  return {build_sectored(c.n_bs_beams, c.front_to_back_constant), build_sectored_ms(c.n_ms_beams)};
}

/// Stage-1 codebooks of the hierarchical search (sectored only).
inline BeamCodebooks build_wide_codebooks(const ScenarioConfig& c) {
  if (c.antenna != AntennaModel::kSectored) throw std::invalid_argument("hierarchical search needs sectored codebooks");
  return {build_sectored(c.effective_wide_bs_beams(), c.front_to_back_constant),
          build_sectored_ms(c.effective_wide_ms_beams())};
}

/// Each non-serving BS joins the serving pilot with probability delta.
inline PilotPartition thin_copilot(const NetworkRealization& net, double delta, Rng& rng) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("thin_copilot: reuse factor out of range (0, 1]");
  PilotPartition p;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i == net.serving_index || uniform_open(rng) < delta) {
      p.copilot_indices.push_back(i);
    } else {
      p.orthogonal_indices.push_back(i);
    }
  }
  return p;
}

/// Same thinning driven by stored marks: BS i is co-pilot iff marks[i] < delta.
inline PilotPartition thin_copilot(const Drop& drop, double delta, const std::vector<double>& marks) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("thin_copilot: reuse factor out of range (0, 1]");
  PilotPartition p;
  for (std::size_t i = 0; i < drop.size(); ++i) {
    if (i == drop.serving() || marks[i] < delta) {
      p.copilot_indices.push_back(i);
    } else {
      p.orthogonal_indices.push_back(i);
    }
  }
  return p;
}

inline PilotPartition full_reuse_partition(const Drop& drop) {
  PilotPartition p;
  for (std::size_t i = 0; i < drop.size(); ++i) p.copilot_indices.push_back(i);
  return p;
}

/// Row-major (MS beam, BS beam) matrix.
struct BeamSurface {
  int n_ms = 0;
  int n_bs = 0;
  std::vector<double> values;

  BeamSurface(int ms, int bs) : n_ms(ms), n_bs(bs), values(static_cast<std::size_t>(ms) * bs, 0.0) {}
  double& at(int m, int n) { return values[static_cast<std::size_t>(m) * n_bs + n]; }
  double at(int m, int n) const { return values[static_cast<std::size_t>(m) * n_bs + n]; }
};

namespace detail {

// Adds weight * D_MS(m, aoa) * D_BS(n, aod) for all (m, n).
inline void add_outer(BeamSurface& s, const BeamCodebooks& cb, double aoa, double aod, double weight) {
  std::vector<double> ms(static_cast<std::size_t>(s.n_ms), 0.0);
  std::vector<double> bs(static_cast<std::size_t>(s.n_bs), 0.0);
  cb.ms.accumulate(aoa, 1.0, ms);
  cb.bs.accumulate(aod, 1.0, bs);
  for (int m = 0; m < s.n_ms; ++m) {
    const double wm = weight * ms[static_cast<std::size_t>(m)];
    if (wm == 0.0) continue;
    double* row = &s.values[static_cast<std::size_t>(m) * s.n_bs];
    for (int n = 0; n < s.n_bs; ++n) row[n] += wm * bs[static_cast<std::size_t>(n)];
  }
}

}  // namespace detail

/// Received serving-BS power (without P_T) for every beam pair.
inline BeamSurface serving_power(const Drop& drop, const BeamCodebooks& cb) {
  BeamSurface s(cb.ms.size(), cb.bs.size());
  for (const Link& c : drop.links[drop.serving()]) detail::add_outer(s, cb, c.aoa, c.aod, c.fading * c.path_loss);
  return s;
}

/// Control SNR for every beam pair.  `sweep` is the codebook pair being trained;
/// `data_bs` is the codebook interferers draw their fixed random beams from.
inline BeamSurface control_snr_surface(const Drop& drop, const PilotPartition& partition, const BeamCodebooks& sweep,
                                       const Codebook& data_bs, const ScenarioConfig& config) {
  BeamSurface s(sweep.ms.size(), sweep.bs.size());
  std::vector<double> per_ms(static_cast<std::size_t>(s.n_ms), 0.0);
  const bool synchronous = config.interferer_beams == InterfererBeams::kSynchronousSweep;
  for (std::size_t l : partition.copilot_indices) {
    const bool sweeping = l == drop.serving() || synchronous;
    const int beam = sweeping ? 0 : beam_from_mark(drop.training_beam[l], data_bs.size());
    for (const Link& c : drop.links[l]) {
      const double w = config.tx_power * c.fading * c.path_loss;
      if (sweeping) {
        detail::add_outer(s, sweep, c.aoa, c.aod, w);
      } else {
        sweep.ms.accumulate(c.aoa, w * data_bs.gain(beam, c.aod), per_ms);
      }
    }
  }
  for (int m = 0; m < s.n_ms; ++m) {
    for (int n = 0; n < s.n_bs; ++n) s.at(m, n) = (s.at(m, n) + per_ms[static_cast<std::size_t>(m)]) / config.noise_power;
  }
  return s;
}

/// Control SNR of a single pair, evaluated term by term.
inline double control_snr(int m, int n, const Drop& drop, const PilotPartition& partition, const BeamCodebooks& cb,
                          const ScenarioConfig& config) {
  const bool synchronous = config.interferer_beams == InterfererBeams::kSynchronousSweep;
  double sum = 0.0;
  for (std::size_t l : partition.copilot_indices) {
    const bool sweeping = l == drop.serving() || synchronous;
    const int beam = sweeping ? n : beam_from_mark(drop.training_beam[l], cb.bs.size());
    for (const Link& c : drop.links[l]) {
      sum += config.tx_power * c.fading * c.path_loss * cb.ms.gain(m, c.aoa) * cb.bs.gain(beam, c.aod);
    }
  }
  return sum / config.noise_power;
}

/// OBP when the pair attains the serving-power maximum, SBP when only the MS
/// beam does, MISS otherwise.
inline Alignment classify(const Drop& drop, const BeamCodebooks& cb, int m, int n) {
  const BeamSurface s = serving_power(drop, cb);
  double best = 0.0;
  std::vector<double> row_max(static_cast<std::size_t>(s.n_ms), 0.0);
  for (int i = 0; i < s.n_ms; ++i) {
    for (int j = 0; j < s.n_bs; ++j) row_max[static_cast<std::size_t>(i)] = std::max(row_max[static_cast<std::size_t>(i)], s.at(i, j));
    best = std::max(best, row_max[static_cast<std::size_t>(i)]);
  }
  if (!(best > 0.0)) return Alignment::kMiss;
  const double tol = best * 1e-12;
  if (s.at(m, n) >= best - tol) return Alignment::kObp;
  if (row_max[static_cast<std::size_t>(m)] >= best - tol) return Alignment::kSbp;
  return Alignment::kMiss;
}

namespace detail {

// Argmax over a rectangle of the surface; lowest m, then lowest n, wins ties.
inline bool argmax(const BeamSurface& s, int m0, int m1, int n0, int n1, int& bm, int& bn) {
  double best = 0.0;
  bm = m0;
  bn = n0;
  bool found = false;
  for (int m = m0; m < m1; ++m) {
    for (int n = n0; n < n1; ++n) {
      if (s.at(m, n) > best) {
        best = s.at(m, n);
        bm = m;
        bn = n;
        found = true;
      }
    }
  }
  return found;
}

}  // namespace detail

inline BeamDecision exhaustive_sweep(const Drop& drop, const PilotPartition& partition, const BeamCodebooks& cb,
                                     const ScenarioConfig& config) {
  const BeamSurface s = control_snr_surface(drop, partition, cb, cb.bs, config);
  BeamDecision d;
  if (!detail::argmax(s, 0, s.n_ms, 0, s.n_bs, d.ms_beam, d.bs_beam)) {
    d = BeamDecision{};
    return d;
  }
  d.alignment = classify(drop, cb, d.ms_beam, d.bs_beam);
  return d;
}

/// Wide-beam sweep, then an exhaustive sweep over the children of the winner.
inline BeamDecision hierarchical_sweep(const Drop& drop, const PilotPartition& stage1, const PilotPartition& stage2,
                                       const BeamCodebooks& wide, const BeamCodebooks& narrow,
                                       const ScenarioConfig& config) {
  const int nb = narrow.bs.size(), nm = narrow.ms.size();
  const int wb = wide.bs.size(), wm = wide.ms.size();
  if (wb < 1 || wm < 1 || nb % wb != 0 || nm % wm != 0) {
    throw std::invalid_argument("hierarchical_sweep: narrow codebook sizes must be multiples of the wide ones");
  }
  const int rb = nb / wb, rm = nm / wm;
  const BeamSurface s1 = control_snr_surface(drop, stage1, wide, narrow.bs, config);
  int km = 0, kn = 0;
  if (!detail::argmax(s1, 0, wm, 0, wb, km, kn)) return BeamDecision{};
  const BeamSurface s2 = control_snr_surface(drop, stage2, narrow, narrow.bs, config);
  BeamDecision d;
  if (!detail::argmax(s2, km * rm, (km + 1) * rm, kn * rb, (kn + 1) * rb, d.ms_beam, d.bs_beam)) {
    d.ms_beam = km * rm;
    d.bs_beam = kn * rb;
    d.alignment = Alignment::kMiss;
    return d;
  }
  d.alignment = classify(drop, narrow, d.ms_beam, d.bs_beam);
  return d;
}

/// Beams that maximize the serving-link gain.
inline BeamDecision perfect_alignment(const Drop& drop, const BeamCodebooks& cb) {
  const BeamSurface s = serving_power(drop, cb);
  BeamDecision d;
  detail::argmax(s, 0, s.n_ms, 0, s.n_bs, d.ms_beam, d.bs_beam);
  d.alignment = Alignment::kObp;
  return d;
}

}  // namespace mmwave_ba
