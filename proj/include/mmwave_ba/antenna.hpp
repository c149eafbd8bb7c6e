#pragma once

// Beam codebooks: the sectored pattern used by the analysis and half-wavelength
// ULA steering beams for the robustness runs.

#include "mmwave_ba/random.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mmwave_ba {

struct SectoredGains {
  double front_to_back = 0.0;  // gamma
  double main = 0.0;
  double side = 0.0;
};

/// Gain model with gamma = 2 pi / (C0 (2 pi - theta)).
inline SectoredGains sectored_gains(double beamwidth, double c0) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!(beamwidth > 0.0 && beamwidth < two_pi)) throw std::invalid_argument("sectored_gains: beamwidth must be in (0, 2 pi)");
  if (!(c0 > 0.0)) throw std::invalid_argument("sectored_gains: C0 must be > 0");
  SectoredGains s;
  s.front_to_back = two_pi / (c0 * (two_pi - beamwidth));
  s.main = (two_pi / beamwidth) * s.front_to_back / (s.front_to_back + 1.0);
  s.side = (two_pi / (two_pi - beamwidth)) / (s.front_to_back + 1.0);
  return s;
}

class SectoredCodebook {
 public:
  SectoredCodebook() = default;
  SectoredCodebook(int n_beams, double main_gain, double side_gain, double reference_orientation)
      : n_beams_(n_beams),
        beamwidth_(2.0 * std::numbers::pi / n_beams),
        main_(main_gain),
        side_(side_gain),
        reference_(wrap_angle(reference_orientation)) {}

  int n_beams() const { return n_beams_; }
  int size() const { return n_beams_; }
  double beamwidth() const { return beamwidth_; }
  double main_gain() const { return main_; }
  double side_gain() const { return side_; }
  double reference_orientation() const { return reference_; }

  double sector_start(int n) const { return wrap_angle(reference_ + n * beamwidth_); }

  /// Beam whose half-open main lobe [start, start + theta) holds `angle`.
  int beam_containing(double angle) const {
    const double rel = wrap_angle(angle - reference_);
    int k = static_cast<int>(rel / beamwidth_);
    if (k >= n_beams_) k = n_beams_ - 1;
    if (k + 1 < n_beams_ && rel >= (k + 1) * beamwidth_) ++k;
    if (k > 0 && rel < k * beamwidth_) --k;
    return k;
  }

  double gain(int n, double angle) const {
    check(n);
    return beam_containing(angle) == n ? main_ : side_;
  }

  int best_beam(double angle) const { return beam_containing(angle); }

  void check(int n) const {
    if (n < 0 || n >= n_beams_) throw std::out_of_range("beam index " + std::to_string(n) + " out of range");
  }

 private:
  int n_beams_ = 0;
  double beamwidth_ = 0.0;
  double main_ = 0.0;
  double side_ = 0.0;
  double reference_ = 0.0;
};

/// BS codebook with the front-to-back gain model.
inline SectoredCodebook build_sectored(int n_beams, double front_to_back_constant, double reference_orientation = 0.0) {
  if (n_beams < 2) throw std::invalid_argument("build_sectored: sectored BS codebook needs at least 2 beams");
  const auto g = sectored_gains(2.0 * std::numbers::pi / n_beams, front_to_back_constant);
  return SectoredCodebook(n_beams, g.main, g.side, reference_orientation);
}

/// MS codebook: side lobes neglected, main gain 2 pi / theta so the pattern still conserves power.
inline SectoredCodebook build_sectored_ms(int n_beams, double reference_orientation = 0.0) {
  if (n_beams < 1) throw std::invalid_argument("build_sectored_ms: need at least 1 beam");
  return SectoredCodebook(n_beams, static_cast<double>(n_beams), 0.0, reference_orientation);
}

using Weights = std::vector<std::complex<double>>;

/// Half-wavelength ULA response, a_k = exp(i pi k sin(phi)), k = 0..N-1.
inline Weights ula_response(double angle, int n_antennas) {
  Weights a(static_cast<std::size_t>(n_antennas));
  const double s = std::sin(angle);
  for (int k = 0; k < n_antennas; ++k) a[static_cast<std::size_t>(k)] = std::polar(1.0, std::numbers::pi * k * s);
  return a;
}

/// |w^H a(phi)|^2 for a unit-norm weight vector.
inline double ula_gain(const Weights& w, double angle, int n_antennas) {
  if (static_cast<int>(w.size()) != n_antennas) throw std::invalid_argument("ula_gain: weight length != antenna count");
  const double s = std::sin(angle);
  std::complex<double> acc = 0.0;
  for (int k = 0; k < n_antennas; ++k) acc += std::conj(w[static_cast<std::size_t>(k)]) * std::polar(1.0, std::numbers::pi * k * s);
  return std::norm(acc);
}

class UlaCodebook {
 public:
  UlaCodebook() = default;
  UlaCodebook(int n_antennas, std::vector<double> steering_angles)
      : n_antennas_(n_antennas), steering_(std::move(steering_angles)) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_antennas_));
    for (double a : steering_) {
      auto w = ula_response(a, n_antennas_);
      for (auto& v : w) v *= norm;
      weights_.push_back(std::move(w));
      sin_steer_.push_back(std::sin(a));
    }
  }

  int n_antennas() const { return n_antennas_; }
  int size() const { return static_cast<int>(steering_.size()); }
  const std::vector<double>& steering_angles() const { return steering_; }
  const std::vector<Weights>& weights() const { return weights_; }

  /// Closed-form Dirichlet kernel, equal to ula_gain(weights()[b], angle).
  double gain(int b, double angle) const {
    if (b < 0 || b >= size()) throw std::out_of_range("beam index " + std::to_string(b) + " out of range");
    const double d = std::numbers::pi * (std::sin(angle) - sin_steer_[static_cast<std::size_t>(b)]) / 2.0;
    const double den = std::sin(d);
    const double n = n_antennas_;
    if (std::abs(den) < 1e-12) return n;
    const double num = std::sin(n * d);
    return num * num / (n * den * den);
  }

  int best_beam(double angle) const {
    int best = 0;
    double g = gain(0, angle);
    for (int b = 1; b < size(); ++b) {
      const double v = gain(b, angle);
      if (v > g) {
        g = v;
        best = b;
      }
    }
    return best;
  }

 private:
  int n_antennas_ = 0;
  std::vector<double> steering_;
  std::vector<Weights> weights_;
  std::vector<double> sin_steer_;
};

/// Steering beams on a uniform sine grid, s_b = -1 + (2b + 1) / B.
inline UlaCodebook build_ula(int n_antennas, int n_beams) {
  if (n_antennas < 1 || n_beams < 1) throw std::invalid_argument("build_ula: sizes must be >= 1");
  std::vector<double> angles;
  for (int b = 0; b < n_beams; ++b) angles.push_back(std::asin(-1.0 + (2.0 * b + 1.0) / n_beams));
  return UlaCodebook(n_antennas, std::move(angles));
}

/// Either codebook kind behind one interface.
class Codebook {
 public:
  Codebook() = default;
  Codebook(SectoredCodebook c) : impl_(std::move(c)) {}
  Codebook(UlaCodebook c) : impl_(std::move(c)) {}

  bool is_sectored() const { return std::holds_alternative<SectoredCodebook>(impl_); }
  const SectoredCodebook& sectored() const { return std::get<SectoredCodebook>(impl_); }
  const UlaCodebook& ula() const { return std::get<UlaCodebook>(impl_); }

  int size() const {
    return std::visit([](const auto& c) { return c.size(); }, impl_);
  }
  double gain(int beam, double angle) const {
    return std::visit([&](const auto& c) { return c.gain(beam, angle); }, impl_);
  }
  int best_beam(double angle) const {
    return std::visit([&](const auto& c) { return c.best_beam(angle); }, impl_);
  }

  /// Adds weight * gain(b, angle) to out[b] for every beam b.
  void accumulate(double angle, double weight, std::vector<double>& out) const {
    if (const auto* s = std::get_if<SectoredCodebook>(&impl_)) {
      if (s->side_gain() != 0.0) {
        const double side = weight * s->side_gain();
        for (auto& v : out) v += side;
        out[static_cast<std::size_t>(s->beam_containing(angle))] += weight * (s->main_gain() - s->side_gain());
      } else {
        out[static_cast<std::size_t>(s->beam_containing(angle))] += weight * s->main_gain();
      }
      return;
    }
    const auto& u = std::get<UlaCodebook>(impl_);
    for (int b = 0; b < u.size(); ++b) out[static_cast<std::size_t>(b)] += weight * u.gain(b, angle);
  }

 private:
  std::variant<SectoredCodebook, UlaCodebook> impl_;
};

}  // namespace mmwave_ba
