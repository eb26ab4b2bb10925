#pragma once

#include <cmath>

#include "common.hpp"
#include "herglotz.hpp"
#include "measure.hpp"

namespace refless {

// Cayley-type map of the upper half-plane onto the disk that sends ∞ to w0.
inline cplx half_plane_to_disk(cplx z, cplx w0) { return w0 * (z - I) / (z + I); }
inline cplx disk_to_half_plane(cplx zeta, cplx w0) { return -I * (zeta + w0) / (zeta - w0); }

// Real image of the circle point e^{iθ} (θ ≠ θ0).
inline double angle_to_line(double theta, double theta0) { return -1.0 / std::tan(0.5 * (theta - theta0)); }
inline double line_to_angle(double lambda, double theta0) { return theta0 + pi + 2.0 * std::atan(lambda); }

// Pull a Caratheodory function back to the line: r(z) = i f(w(z)) with
// w(z) = w0 (z-i)/(z+i). The result is d + ∫ dμ(λ)/(λ-z) with
// μ = (1+λ²) ω∘w, i.e. density 2ω'(θ(λ)) against dλ.
inline HerglotzFunction mobius_disk_to_line(const CaratheodoryFunction& f, double theta0, double min_dist = 1e-6) {
  const auto& om = f.measure();
  if (om.distance_to_support(theta0) < min_dist) throw IllConditioned("w0 too close to the support");
  const cplx w0 = std::polar(1.0, theta0);
  cplx dv = I * f.eval(w0);
  SpectralMeasure mu;
  mu.space = Space::Line;
  for (const auto& a : om.atoms) {
    const double l = angle_to_line(a.position, theta0);
    mu.atoms.push_back({l, (1.0 + l * l) * a.weight});
  }
  for (const auto& p : om.ac) {
    // Rotate the arc so it starts after θ0; then θ -> λ is increasing on it.
    const double shift = wrap_angle(p.lo - theta0) + theta0 - p.lo;
    const double ta = p.lo + shift, tb = p.hi + shift;
    AcPiece q;
    q.lo = angle_to_line(ta, theta0);
    q.hi = angle_to_line(tb, theta0);
    q.edge = p.edge;
    // For InverseSqrt arcs the smooth factor picks up the ratio of the two
    // edge weights, which is smooth and nonzero up to the edges.
    // Within rounding distance of an edge the ratio is replaced by its limit
    // (dθ/dλ = 2/(1+λ²) there) so quadrature never amplifies rounding noise.
    q.smooth = [p, theta0, shift, lo = q.lo, hi = q.hi](double l) {
      const double t = line_to_angle(l, theta0) - shift;
      if (p.edge == Edge::Regular) return 2.0 * p.smooth(t);
      const double near = std::min(l - lo, hi - l) / (hi - lo);
      if (near < 1e-7) return 2.0 * p.smooth(t) * std::sqrt((hi - lo) * (1.0 + l * l) / (2.0 * (p.hi - p.lo)));
      return 2.0 * p.smooth(t) * std::sqrt((l - lo) * (hi - l)) / p.weight(t);
    };
    mu.ac.push_back(std::move(q));
  }
  return HerglotzFunction(dv.real(), 0.0, std::move(mu), Kernel::Stieltjes);
}

// Invert about λ0: r(ζ) = m(λ0 - 1/ζ), compactly supported image measure.
inline HerglotzFunction mobius_line_inversion(const HerglotzFunction& m, double lambda0, double min_dist = 1e-6) {
  if (m.slope() != 0.0) throw InvalidInput("inversion needs a function without linear term");
  const auto& om = m.measure();
  if (om.distance_to_support(lambda0) < min_dist) throw IllConditioned("λ0 too close to the support");
  const bool nev = m.kernel() == Kernel::Nevanlinna;
  // 1/(λ-z) = η²/(η-ζ) - η with η = 1/(λ0-λ); the -η pieces collect into d.
  auto constant_part = [&](double l) {
    const double eta = 1.0 / (lambda0 - l);
    return -eta - (nev ? l / (1.0 + l * l) : 0.0);
  };
  double d = m.c();
  SpectralMeasure mu;
  mu.space = Space::Line;
  for (const auto& a : om.atoms) {
    const double eta = 1.0 / (lambda0 - a.position);
    mu.atoms.push_back({eta, eta * eta * a.weight});
    d += a.weight * constant_part(a.position);
  }
  for (const auto& p : om.ac) {
    d += p.integrate_against(constant_part).value;
    AcPiece q;
    q.lo = 1.0 / (lambda0 - p.lo);
    q.hi = 1.0 / (lambda0 - p.hi);
    q.edge = p.edge;
    q.smooth = [p, lambda0, lo = q.lo, hi = q.hi](double eta) {
      const double l = lambda0 - 1.0 / eta;
      if (p.edge == Edge::Regular) return p.smooth(l);
      const double near = std::min(eta - lo, hi - eta) / (hi - lo);
      if (near < 1e-7) return p.smooth(l) * std::abs(eta) * std::sqrt((hi - lo) / (p.hi - p.lo));
      return p.smooth(l) * std::sqrt((eta - lo) * (hi - eta)) / p.weight(l);
    };
    mu.ac.push_back(std::move(q));
  }
  return HerglotzFunction(d, 0.0, std::move(mu), Kernel::Stieltjes);
}

}  // namespace refless
