#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "chebyshev.hpp"
#include "common.hpp"
#include "quadrature.hpp"

namespace refless {

enum class Space { Line, Circle };

// How a density behaves at the ends of its piece. InverseSqrt means
// density * sqrt((x-lo)(hi-x)) is smooth; that product is what gets sampled.
enum class Edge { Regular, InverseSqrt };

struct Atom {
  double position;  // point on the line, or angle in radians on the circle
  double weight;
};

// Density on [lo, hi]. On the circle lo/hi are angles with 0 < hi-lo <= 2π
// and the density is taken against dθ.
//
// `smooth` is the density itself for Regular pieces. For InverseSqrt pieces
// it is density * sqrt((x-lo)(hi-x)), a function that stays well conditioned
// at the edges; the density is recovered by dividing the weight back out.
struct AcPiece {
  double lo = 0.0, hi = 0.0;
  std::function<double(double)> smooth;
  Edge edge = Edge::Regular;

  static AcPiece regular(double lo, double hi, std::function<double(double)> f) {
    return {lo, hi, std::move(f), Edge::Regular};
  }
  static AcPiece inverse_sqrt(double lo, double hi, std::function<double(double)> h) {
    return {lo, hi, std::move(h), Edge::InverseSqrt};
  }

  double weight(double x) const {
    if (edge == Edge::Regular) return 1.0;
    const double w = (x - lo) * (hi - x);
    return w > 0.0 ? std::sqrt(w) : 0.0;
  }

  double density(double x) const {
    if (edge == Edge::Regular) return smooth(x);
    const double w = weight(x);
    return w > 0.0 ? smooth(x) / w : inf;
  }
  double operator()(double x) const { return density(x); }

  // ∫ f(x) dν(x) for the reference measure: dx on Regular pieces and
  // dx/sqrt((x-lo)(hi-x)) on InverseSqrt ones. Both go through
  // x = mid - half cos t; for InverseSqrt pieces dν = dt exactly.
  template <class F>
  auto integrate_reference(F f, QuadOptions opt = {}, const std::vector<double>& breaks = {}) const {
    if (edge == Edge::Regular) return integrate_band(f, lo, hi, opt, breaks);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    std::vector<double> tb;
    for (double x : breaks)
      if (x > lo && x < hi) tb.push_back(std::acos(std::clamp((mid - x) / half, -1.0, 1.0)));
    return integrate([&](double t) { return f(mid - half * std::cos(t)); }, 0.0, pi, opt, tb);
  }

  // ∫ density(x) g(x) dx.
  template <class G>
  auto integrate_against(G g, QuadOptions opt = {}, const std::vector<double>& breaks = {}) const {
    return integrate_reference([&](double x) { return smooth(x) * g(x); }, opt, breaks);
  }

  double mass() const {
    return integrate_against([](double) { return 1.0; }).value;
  }

  // Values of `smooth` at first-kind Chebyshev points.
  std::vector<double> samples(double tol = 1e-12) const { return chebyshev_adaptive(smooth, lo, hi, tol).values(); }

  static AcPiece from_samples(double lo, double hi, std::vector<double> vals, Edge edge) {
    Chebyshev cheb(lo, hi, std::move(vals));
    return {lo, hi, [cheb](double x) { return cheb(x); }, edge};
  }
};

struct SpectralMeasure {
  Space space = Space::Line;
  std::vector<Atom> atoms;
  std::vector<AcPiece> ac;
  bool total_is_finite = true;

  double atom_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
  double ac_mass() const {
    double s = 0.0;
    for (const auto& p : ac) s += p.mass();
    return s;
  }
  double total_mass() const { return atom_mass() + ac_mass(); }
  bool empty() const { return atoms.empty() && ac.empty(); }

  // Distance from x to the support: plain distance on the line, angular
  // distance on the circle.
  double distance_to_support(double x) const {
    double d = inf;
    auto dist = [this](double a, double b) {
      if (space == Space::Line) return std::abs(a - b);
      double t = wrap_angle(a - b);
      return std::min(t, 2.0 * pi - t);
    };
    for (const auto& a : atoms) d = std::min(d, dist(x, a.position));
    for (const auto& p : ac) {
      if (space == Space::Line) {
        if (x >= p.lo && x <= p.hi) return 0.0;
        d = std::min({d, std::abs(x - p.lo), std::abs(x - p.hi)});
      } else {
        if (wrap_angle(x - p.lo) <= p.hi - p.lo) return 0.0;
        d = std::min({d, dist(x, p.lo), dist(x, p.hi)});
      }
    }
    return d;
  }

  void validate() const {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (!(atoms[i].weight > 0.0)) throw InvalidInput("atom weight must be positive");
      for (std::size_t j = 0; j < i; ++j)
        if (atoms[i].position == atoms[j].position) throw InvalidInput("duplicate atom position");
    }
    for (const auto& p : ac) {
      if (!(p.hi > p.lo)) throw InvalidInput("empty AC piece");
      if (space == Space::Circle && p.hi - p.lo > 2.0 * pi + 1e-12) throw InvalidInput("arc longer than the circle");
      if (!p.smooth) throw InvalidInput("AC piece without density");
    }
  }
};

}  // namespace refless
