#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "boundary.hpp"
#include "common.hpp"
#include "jacobi.hpp"
#include "sets.hpp"

namespace refless {

struct PotentialCell {
  double lo, hi, v;
  bool operator==(const PotentialCell&) const = default;
};

// Piecewise-constant potential: `values[i]` on [breaks[i], breaks[i+1]),
// v_left before the first break and v_right after the last one. No breaks
// means the constant v_left == v_right.
struct PiecewisePotential {
  std::vector<double> breaks;
  std::vector<double> values;
  double v_left = 0.0, v_right = 0.0;

  static PiecewisePotential constant(double c) { return {{}, {}, c, c}; }
  static PiecewisePotential free() { return constant(0.0); }

  // Cells must tile a finite interval without gaps or overlaps.
  static PiecewisePotential from_cells(std::vector<PotentialCell> cells, double v_left, double v_right) {
    PiecewisePotential p;
    p.v_left = v_left;
    p.v_right = v_right;
    if (cells.empty()) {
      if (v_left != v_right) p.breaks = {0.0};
      p.validate();
      return p;
    }
    std::sort(cells.begin(), cells.end(), [](const PotentialCell& a, const PotentialCell& b) { return a.lo < b.lo; });
    p.breaks.push_back(cells.front().lo);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!(cells[i].hi > cells[i].lo)) throw InvalidInput("potential cell with hi <= lo");
      if (i && cells[i].lo != cells[i - 1].hi) throw InvalidInput("potential cells must tile an interval");
      p.breaks.push_back(cells[i].hi);
      p.values.push_back(cells[i].v);
    }
    p.validate();
    return p;
  }

  void validate() const {
    if (breaks.empty()) {
      if (!values.empty() || v_left != v_right) throw InvalidInput("potential without breaks must be constant");
    } else if (values.size() + 1 != breaks.size()) {
      throw InvalidInput("potential needs one value per cell");
    }
    for (std::size_t i = 1; i < breaks.size(); ++i)
      if (!(breaks[i] > breaks[i - 1])) throw InvalidInput("potential breaks must increase");
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(v_left) || bad(v_right) || std::any_of(values.begin(), values.end(), bad) ||
        std::any_of(breaks.begin(), breaks.end(), bad))
      throw InvalidInput("potential must be finite");
  }

  double at(double x) const {
    if (breaks.empty() || x < breaks.front()) return v_left;
    if (x >= breaks.back()) return v_right;
    const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    return values[static_cast<std::size_t>(it - breaks.begin()) - 1];
  }

  double infimum() const {
    double m = std::min(v_left, v_right);
    for (double v : values) m = std::min(m, v);
    return m;
  }
  double supremum_abs() const {
    double m = std::max(std::abs(v_left), std::abs(v_right));
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  // Bottom of the essential spectrum.
  double threshold() const { return std::min(v_left, v_right); }

  bool operator==(const PiecewisePotential&) const = default;
};

namespace detail {

// tanh(qL)/q, even in q and finite as q -> 0.
inline cplx tanh_over(cplx q, double len) {
  const cplx w = q * len;
  if (std::abs(w) < 1e-3) {
    const cplx w2 = w * w;
    return len * (1.0 - w2 / 3.0 + 2.0 * w2 * w2 / 15.0);
  }
  if (std::abs(w.real()) > 40.0) return std::copysign(1.0, w.real()) / q;
  return std::tanh(w) / q;
}

// Riccati transport of m = ψ'/ψ over a distance `len` (either sign) in a
// constant potential v: with q² = v - z and s = tanh(qL)/q,
// m(x+L) = (q² s + m)/(1 + m s). Written through tanh, the map never
// overflows on long cells.
inline cplx riccati_step(cplx m, double v, cplx z, double len) {
  if (len == 0.0) return m;
  const cplx q2 = v - z;
  const cplx s = tanh_over(std::sqrt(q2), len);
  return (q2 * s + m) / (1.0 + m * s);
}

inline cplx tail_seed(double v, Side side, cplx z) {
  const cplx k = sqrt_upper(z - v);
  return side == Side::Plus ? I * k : -I * k;
}

}  // namespace detail

// Half-line Weyl function m_±(z,x0) = ψ_±'(z,x0)/ψ_±(z,x0). Real z returns
// the boundary value from the upper half-plane wherever the transport does
// not hit a pole.
inline cplx m_schrodinger(const PiecewisePotential& V, Side side, double x0, cplx z) {
  const auto& b = V.breaks;
  if (side == Side::Plus) {
    if (b.empty() || x0 >= b.back()) return detail::tail_seed(V.v_right, side, z);
    cplx m = detail::tail_seed(V.v_right, side, z);
    double x = b.back();
    for (std::size_t i = b.size() - 1; i-- > 0 && x > x0;) {
      const double stop = std::max(b[i], x0);
      m = detail::riccati_step(m, V.values[i], z, stop - x);
      x = stop;
    }
    if (x > x0) m = detail::riccati_step(m, V.v_left, z, x0 - x);
    return m;
  }
  if (b.empty() || x0 <= b.front()) return detail::tail_seed(V.v_left, side, z);
  cplx m = detail::tail_seed(V.v_left, side, z);
  double x = b.front();
  for (std::size_t i = 0; i + 1 < b.size() && x < x0; ++i) {
    const double stop = std::min(b[i + 1], x0);
    m = detail::riccati_step(m, V.values[i], z, stop - x);
    x = stop;
  }
  if (x < x0) m = detail::riccati_step(m, V.v_right, z, x0 - x);
  return m;
}

struct SchrodingerWeylData {
  double x0 = 0.0;
  cplx z{};
  cplx m_plus{}, m_minus{};
  cplx g{};    // diagonal Green's function, also M_{0,0}
  cplx m11{};  // m_- m_+ / (m_- - m_+)
};

inline SchrodingerWeylData green_diag_schrodinger(const PiecewisePotential& V, double x0, cplx z) {
  SchrodingerWeylData d;
  d.x0 = x0;
  d.z = z;
  d.m_plus = m_schrodinger(V, Side::Plus, x0, z);
  d.m_minus = m_schrodinger(V, Side::Minus, x0, z);
  const cplx w = d.m_minus - d.m_plus;
  if (w == cplx{}) throw PoleError("z is an eigenvalue");
  d.g = 1.0 / w;
  d.m11 = d.m_minus * d.m_plus * d.g;
  return d;
}

inline BoundaryValue m_schrodinger_boundary(const PiecewisePotential& V, Side side, double x0, double lambda,
                                            const Ladder& ladder = default_line_ladder()) {
  return boundary_value_line([&](cplx z) { return m_schrodinger(V, side, x0, z); }, lambda, ladder);
}

inline XiValue xi_schrodinger(const PiecewisePotential& V, double x, double lambda,
                              const Ladder& ladder = default_line_ladder()) {
  return detail::xi_from([&](double e) { return green_diag_schrodinger(V, x, cplx(lambda, e)).g; }, ladder, 1e-6);
}

// sup and mean of |m_+(λ+i0) - conj(m_-(λ+i0))| over the grid points on E.
inline Defect reflectionless_defect_schrodinger(const PiecewisePotential& V, double x0, const FiniteGapSet& set,
                                                const std::vector<double>& grid,
                                                const Ladder& ladder = default_line_ladder()) {
  return detail::aggregate_defect(grid, [&](double x) { return set.contains(x); }, [&](double x) {
    auto bp = m_schrodinger_boundary(V, Side::Plus, x0, x, ladder);
    auto bm = m_schrodinger_boundary(V, Side::Minus, x0, x, ladder);
    const bool ok = bp.converged && bm.converged && !bp.infinite && !bm.infinite;
    const double v = ok ? std::abs(bp.value - std::conj(bm.value)) : inf;
    return std::pair{v, ok};
  });
}

namespace detail {

using RealVec = std::array<double, 2>;

// Carries (ψ, ψ') across a constant cell at real energy, rescaled to unit
// length. Positive rescaling keeps sign information, so the Wronskian built
// from these vectors changes sign exactly where the unscaled one does.
inline RealVec carry(RealVec u, double v, double lambda, double len) {
  const double q2 = v - lambda;
  RealVec w;
  if (q2 > 0.0) {
    const double q = std::sqrt(q2), t = std::tanh(q * len);
    w = {u[0] + u[1] * t / q, u[0] * q * t + u[1]};  // divided by cosh(qL) > 0
  } else if (q2 < 0.0) {
    const double k = std::sqrt(-q2), c = std::cos(k * len), s = std::sin(k * len);
    w = {u[0] * c + u[1] * s / k, -u[0] * k * s + u[1] * c};
  } else {
    w = {u[0] + u[1] * len, u[1]};
  }
  const double n = std::hypot(w[0], w[1]);
  return {w[0] / n, w[1] / n};
}

// Wronskian of the decaying solutions at the first break, for λ below the
// essential spectrum.
inline double bound_state_wronskian(const PiecewisePotential& V, double lambda) {
  const double kl = std::sqrt(V.v_left - lambda), kr = std::sqrt(V.v_right - lambda);
  RealVec left{1.0, kl};
  const double n = std::hypot(1.0, kr);
  RealVec right{1.0 / n, -kr / n};
  const auto& b = V.breaks;
  for (std::size_t i = b.size() - 1; i-- > 0;) right = carry(right, V.values[i], lambda, b[i] - b[i + 1]);
  return left[0] * right[1] - left[1] * right[0];
}

}  // namespace detail

// Eigenvalues below the essential spectrum, located by sign changes of the
// Wronskian of the two decaying solutions on a uniform scan and refined by
// bisection.
inline std::vector<double> schrodinger_bound_states(const PiecewisePotential& V, int scan = 4000) {
  std::vector<double> out;
  if (V.breaks.empty()) return out;
  const double top = V.threshold(), bottom = V.infimum();
  if (!(top > bottom)) return out;
  const double stop = top - 1e-12 * std::max(1.0, std::abs(top));
  auto w = [&](double l) { return detail::bound_state_wronskian(V, l); };
  double x_prev = bottom, w_prev = w(bottom);
  for (int i = 1; i <= scan; ++i) {
    const double x = bottom + (stop - bottom) * i / scan;
    const double wx = w(x);
    if (w_prev == 0.0) {
      out.push_back(x_prev);
    } else if ((w_prev < 0.0) != (wx < 0.0) && wx != 0.0) {
      double lo = x_prev, hi = x, flo = w_prev;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi), fm = w(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    x_prev = x;
    w_prev = wx;
  }
  return out;
}

// Essential spectrum [min(V_±∞), ∞), cut at `cap` for grid work.
inline FiniteGapSet schrodinger_essential_set(const PiecewisePotential& V, double cap) {
  return FiniteGapSet::from_bands({{V.threshold(), cap}}, true);
}

}  // namespace refless
