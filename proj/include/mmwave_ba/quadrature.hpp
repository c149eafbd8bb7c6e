#pragma once

// Fixed composite Gauss-Legendre rules on finite intervals and mapped half
// lines, plus an adaptive Gauss-Kronrod wrapper for one-dimensional checks.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mmwave_ba {

struct QuadratureSpec {
  int x_panels = 8;   // serving distance
  int g_panels = 6;   // serving fading gain
  int t_panels = 6;   // interferer radius
  double tolerance = 1e-9;          // adaptive one-dimensional integrals
  double radial_limit_factor = 40;  // x integrals stop at this many cell radii
  int alzer_cap = 10;
  double alzer_tolerance = 1e-3;

  /// Twice the panels and half the tolerance.
  QuadratureSpec refined() const {
    QuadratureSpec q = *this;
    q.x_panels *= 2;
    q.g_panels *= 2;
    q.t_panels *= 2;
    q.tolerance /= 2;
    return q;
  }
};

struct QuadNode {
  double x;
  double w;
};

namespace detail {

inline const std::vector<QuadNode>& gauss16() {
  static const std::vector<QuadNode> rule = [] {
    using G = boost::math::quadrature::gauss<double, 16>;
    std::vector<QuadNode> r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.push_back({a[i], w[i]});
      if (a[i] != 0.0) r.push_back({-a[i], w[i]});
    }
    return r;
  }();
  return rule;
}

}  // namespace detail

/// Composite rule with `panels` equal panels on [a, b].
inline std::vector<QuadNode> interval_nodes(double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("interval_nodes: panels must be >= 1");
  std::vector<QuadNode> out;
  const auto& rule = detail::gauss16();
  out.reserve(rule.size() * static_cast<std::size_t>(panels));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (const auto& n : rule) out.push_back({mid + 0.5 * h * n.x, 0.5 * h * n.w});
  }
  return out;
}

/// Rule for [a, inf) under t = a + s u / (1 - u), u in (0, 1).  About half of
/// the nodes land in [a, a + s].
inline std::vector<QuadNode> half_line_nodes(double a, double scale, int panels) {
  if (!(scale > 0.0)) throw std::invalid_argument("half_line_nodes: scale must be > 0");
  std::vector<QuadNode> out;
  for (const auto& n : interval_nodes(0.0, 1.0, panels)) {
    const double u = n.x;
    const double one_minus = 1.0 - u;
    out.push_back({a + scale * u / one_minus, n.w * scale / (one_minus * one_minus)});
  }
  return out;
}

/// Adaptive 61-point Gauss-Kronrod on [a, b]; b may be infinite.
template <class F>
double integrate_adaptive(F f, double a, double b, double tolerance, double* error = nullptr) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tolerance, &err);
  if (error) *error = err;
  if (!std::isfinite(v)) throw std::runtime_error("adaptive quadrature produced a non-finite value");
  return v;
}

}  // namespace mmwave_ba
