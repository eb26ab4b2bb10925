#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "mobius.hpp"
#include "quadrature.hpp"
#include "sets.hpp"

namespace refless {

// ---------------------------------------------------------------------------
// Homogeneity

struct Homogeneity {
  double epsilon = 0.0;
  double witness_point = 0.0;
  double witness_delta = 0.0;
  bool homogeneous = false;
};

namespace detail {

inline double overlap(double a, double b, double c, double d) { return std::max(0.0, std::min(b, d) - std::max(a, c)); }

inline double line_window_mass(const std::vector<Interval>& bands, double x, double delta) {
  double m = 0.0;
  for (const auto& b : bands) m += overlap(b.lo, b.hi, x - delta, x + delta);
  return m;
}

// Minimum of |E ∩ (x-δ, x+δ)|/δ over δ in (0, dmax). The window mass is
// piecewise linear in δ with kinks at the distances to band edges, and the
// ratio is monotone between kinks, so checking kinks and dmax is exact.
inline std::pair<double, double> min_ratio_at(const std::function<double(double)>& mass, const std::vector<double>& kinks,
                                              double dmax, int extra) {
  double best = inf, arg = dmax;
  auto probe = [&](double d) {
    if (!(d > 0.0) || d > dmax) return;
    const double r = mass(d) / d;
    if (r < best) {
      best = r;
      arg = d;
    }
  };
  for (double d : kinks) probe(d);
  probe(dmax);
  for (int i = 1; i <= extra; ++i) probe(dmax * i / (extra + 1.0));
  return {best, arg};
}

}  // namespace detail

inline Homogeneity homogeneity_epsilon(const FiniteGapSet& set, int point_density = 200, int delta_density = 16) {
  Homogeneity h;
  if (set.unbounded) throw InvalidInput("homogeneity of unbounded sets goes through the inversion");
  const auto bands = set.bands();
  const double diam = set.diameter();
  if (!(set.measure() > 0.0)) return h;
  const auto edges = set.endpoints();
  auto eval = [&](double x) {
    std::vector<double> kinks;
    for (double e : edges) kinks.push_back(std::abs(x - e));
    return detail::min_ratio_at([&](double d) { return detail::line_window_mass(bands, x, d); }, kinks, diam,
                                delta_density);
  };
  std::vector<double> xs = edges;
  for (const auto& b : bands)
    for (int i = 1; i < point_density; ++i) xs.push_back(b.lo + b.length() * i / point_density);
  h.epsilon = inf;
  for (double x : xs) {
    auto [r, d] = eval(x);
    if (r < h.epsilon) {
      h.epsilon = r;
      h.witness_point = x;
      h.witness_delta = d;
    }
  }
  // Local refinement around the running minimum.
  double step = 0.0;
  for (const auto& b : bands) step = std::max(step, b.length() / point_density);
  for (int it = 0; it < 40 && step > 1e-14 * std::max(1.0, diam); ++it) {
    bool moved = false;
    for (double x : {h.witness_point - step, h.witness_point + step}) {
      if (!set.contains(x)) continue;
      auto [r, d] = eval(x);
      if (r < h.epsilon) {
        h.epsilon = r;
        h.witness_point = x;
        h.witness_delta = d;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  h.homogeneous = h.epsilon > 0.0;
  return h;
}

// Circle version: windows are arcs of half-width δ in (0, π].
inline Homogeneity homogeneity_epsilon(const ArcSet& set, int point_density = 200, int delta_density = 16) {
  Homogeneity h;
  if (!(set.measure() > 0.0)) return h;
  const auto kept = set.kept();
  auto mass = [&](double t, double d) {
    double m = 0.0;
    for (const auto& k : kept)
      for (int s = -1; s <= 1; ++s) m += detail::overlap(k.lo + 2.0 * pi * s, k.hi + 2.0 * pi * s, t - d, t + d);
    return m;
  };
  std::vector<double> edges;
  for (const auto& k : kept) {
    edges.push_back(k.lo);
    edges.push_back(k.hi);
  }
  auto eval = [&](double t) {
    std::vector<double> kinks;
    for (double e : edges) {
      const double u = wrap_angle(t - e);
      kinks.push_back(std::min(u, 2.0 * pi - u));
    }
    return detail::min_ratio_at([&](double d) { return mass(t, d); }, kinks, pi, delta_density);
  };
  std::vector<double> ts;
  for (const auto& k : kept) {
    if (!set.is_full()) {
      ts.push_back(k.lo);
      ts.push_back(k.hi);
    }
    for (int i = 1; i < point_density; ++i) ts.push_back(k.lo + k.length() * i / point_density);
  }
  h.epsilon = inf;
  for (double t : ts) {
    auto [r, d] = eval(t);
    if (r < h.epsilon) {
      h.epsilon = r;
      h.witness_point = wrap_angle(t);
      h.witness_delta = d;
    }
  }
  h.homogeneous = h.epsilon > 0.0;
  return h;
}

// ---------------------------------------------------------------------------
// Green's function with pole at infinity

namespace detail {

// sqrt(∏ (t - E_k)) as a product of principal roots per band: cut exactly on
// E, positive on (e_inf, ∞), ~ t^{g+1} at infinity.
inline cplx sqrt_q(const std::vector<Interval>& bands, cplx t) {
  cplx s = 1.0;
  for (const auto& b : bands) s *= std::sqrt(t - b.lo) * std::sqrt(t - b.hi);
  return s;
}

// ∏ sqrt|t - e| over the edges other than the two bounding gap `skip`.
inline double rest_weight(const std::vector<double>& edges, std::size_t skip, double t) {
  double w = 1.0;
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (k != skip && k != skip + 1) w *= std::sqrt(std::abs(t - edges[k]));
  return w;
}

// Dense Gaussian elimination with partial pivoting; small systems only.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, double pivot_tol) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) <= pivot_tol * std::max(scale, 1e-300)) throw DegenerateSet("singular period system");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

struct GreenData {
  FiniteGapSet set;
  std::vector<double> critical_points;
  double capacity = 0.0;
  double capacity_crosscheck = 0.0;  // log x - G(x) at a far point
  int chebyshev_nodes = 0;

  double centre() const { return 0.5 * (set.e0 + set.e_inf); }
  double half() const { return 0.5 * set.diameter(); }

  // P(t)/sqrt(Q(t)) with P monic with roots at the critical points.
  cplx density(cplx t) const {
    cplx p = 1.0;
    for (double c : critical_points) p *= (t - c);
    return p / detail::sqrt_q(set.bands(), t);
  }
  // Same on the real axis off E, returned as |P|/sqrt|Q| with the sign of P.
  double density_real(double t) const {
    double p = 1.0, q = 1.0;
    for (double c : critical_points) p *= (t - c);
    for (double e : set.endpoints()) q *= std::sqrt(std::abs(t - e));
    return p / q;
  }
  // density_real(a + off) with the distances to edges formed before adding,
  // so an edge at a keeps full relative accuracy.
  double density_offset(double a, double off) const {
    double p = 1.0, q = 1.0;
    for (double c : critical_points) p *= (a - c) + off;
    for (double e : set.endpoints()) q *= std::sqrt(std::abs((a - e) + off));
    return p / q;
  }
};

inline GreenData green_data(const FiniteGapSet& set) {
  if (set.unbounded) throw InvalidInput("Green's function needs a bounded set; invert first");
  set.validate();
  if (!(set.diameter() > 0.0)) throw DegenerateSet("set has zero diameter");
  for (const auto& b : set.bands())
    if (!(b.length() > 0.0)) throw DegenerateSet("band of zero length");
  GreenData gd;
  gd.set = set;
  const std::size_t g = set.genus();
  const auto edges = set.endpoints();
  const double c0 = gd.centre(), h = gd.half();

  if (g > 0) {
    std::vector<double> prev;
    for (int n = 16; n <= (1 << 16); n *= 2) {
      // Row j: ∫_{gap j} u^k / sqrt|Q| dt, u = (t - c0)/h, by Gauss-Chebyshev.
      std::vector<std::vector<double>> a(g, std::vector<double>(g));
      std::vector<double> rhs(g);
      for (std::size_t j = 0; j < g; ++j) {
        const double lo = set.gaps[j].lo, hi = set.gaps[j].hi;
        const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        std::vector<double> row(g + 1, 0.0);
        for (int i = 0; i < n; ++i) {
          const double t = mid + hw * std::cos((2.0 * i + 1.0) * pi / (2.0 * n));
          const double w = 1.0 / detail::rest_weight(edges, 2 * j + 1, t);
          double u = 1.0;
          const double uu = (t - c0) / h;
          for (std::size_t k = 0; k <= g; ++k) {
            row[k] += u * w;
            u *= uu;
          }
        }
        for (std::size_t k = 0; k < g; ++k) a[j][k] = row[k];
        rhs[j] = -row[g];
      }
      auto coef = detail::solve_dense(a, rhs, 1e-13);
      coef.push_back(1.0);
      auto pu = [&](double t) {
        const double u = (t - c0) / h;
        double v = 0.0;
        for (std::size_t k = coef.size(); k-- > 0;) v = v * u + coef[k];
        return v;
      };
      std::vector<double> roots;
      for (std::size_t j = 0; j < g; ++j) {
        double lo = set.gaps[j].lo, hi = set.gaps[j].hi;
        double flo = pu(lo);
        if (flo * pu(hi) > 0.0) throw DegenerateSet("no critical point in a gap");
        for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo)); ++it) {
          const double m = 0.5 * (lo + hi);
          const double fm = pu(m);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = m;
            flo = fm;
          } else {
            hi = m;
          }
        }
        roots.push_back(0.5 * (lo + hi));
      }
      gd.chebyshev_nodes = n;
      bool done = !prev.empty();
      for (std::size_t j = 0; j < g && done; ++j)
        if (std::abs(roots[j] - prev[j]) >= 1e-12 * std::max(1.0, h)) done = false;
      prev = roots;
      if (done) break;
    }
    gd.critical_points = prev;
  }

  // log cap = log(e_inf - s) - ∫_{e_inf}^∞ [P/√Q - 1/(t-s)] dt.
  const double L = set.diameter();
  const double s = set.e_inf - L;
  auto tail = integrate([&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double w = u / (1.0 - u);
    const double off = L * w * w;
    const double jac = 2.0 * L * w / ((1.0 - u) * (1.0 - u));
    return (gd.density_offset(set.e_inf, off) - 1.0 / (L + off)) * jac;
  }, 0.0, 1.0, {1e-16, 1e-15, 4000});
  gd.capacity = std::exp(std::log(set.e_inf - s) - tail.value);

  const double far = set.e_inf + 1e4 * L;
  auto gx = integrate([&](double u) {
    if (u <= 0.0) return 0.0;
    return gd.density_offset(set.e_inf, (far - set.e_inf) * u * u) * 2.0 * (far - set.e_inf) * u;
  }, 0.0, 1.0, {1e-15, 1e-14, 4000});
  gd.capacity_crosscheck = std::exp(std::log(far) - gx.value);
  return gd;
}

namespace detail {

// G along the real axis off E: integrate P/sqrt|Q| from the nearest edge.
inline double green_real(const GreenData& gd, double x) {
  const auto& set = gd.set;
  if (set.contains(x)) return 0.0;
  double a;
  if (x > set.e_inf)
    a = set.e_inf;
  else if (x < set.e0)
    a = set.e0;
  else {
    a = set.e0;
    for (const auto& g : set.gaps)
      if (x > g.lo && x < g.hi) a = (x - g.lo < g.hi - x) ? g.lo : g.hi;
  }
  const double span = x - a;
  auto r = integrate([&](double v) {
    return v <= 0.0 ? 0.0 : gd.density_offset(a, span * v * v) * 2.0 * span * v;
  }, 0.0, 1.0,
                     {1e-16, 1e-14, 4000});
  return std::abs(r.value);
}

}  // namespace detail

inline double green_eval(const GreenData& gd, cplx z) {
  if (!is_finite(z)) return inf;
  if (z.imag() == 0.0) return detail::green_real(gd, z.real());
  if (z.imag() < 0.0) z = std::conj(z);
  const auto bands = gd.set.bands();
  const double L = gd.set.diameter();
  const cplx s = cplx(gd.centre(), -L);
  // Vertical ray t = z + iτ, τ = L (v/(1-v))^2.
  auto r = integrate([&](double v) -> cplx {
    if (v >= 1.0) return 0.0;
    const double w = v / (1.0 - v);
    const double tau = L * w * w;
    const double jac = 2.0 * L * w / ((1.0 - v) * (1.0 - v));
    const cplx t = z + I * tau;
    return (gd.density(t) - 1.0 / (t - s)) * I * jac;
  }, 0.0, 1.0, {1e-15, 1e-14, 4000});
  const double val = std::log(std::abs(z - s)) - std::log(gd.capacity) - r.value.real();
  return std::max(val, 0.0);
}

// Image of a set under t -> 1/(λ0 - t). An unbounded last band ends at the
// image of infinity, 0, which closes up the compact image.
inline FiniteGapSet invert_set(const FiniteGapSet& set, double lambda0) {
  if (set.contains(lambda0)) throw InvalidInput("inversion point lies on the set");
  std::vector<Interval> img;
  const auto bands = set.bands();
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const bool open_end = set.unbounded && i + 1 == bands.size();
    const double p = 1.0 / (lambda0 - b.lo), q = open_end ? 0.0 : 1.0 / (lambda0 - b.hi);
    img.push_back({std::min(p, q), std::max(p, q)});
  }
  return FiniteGapSet::from_bands(img);
}

struct PoleValue {
  double value = 0.0;
  bool near_pole = false;
};

// G_E(z, λ0) through the image set with its pole pushed to infinity.
inline PoleValue green_eval_finite_pole(const GreenData& image, cplx z, double lambda0, double pole_flag = 1e-4) {
  PoleValue pv;
  const cplx dz = lambda0 - z;
  pv.near_pole = std::abs(dz) < pole_flag;
  if (dz == 0.0) {
    pv.value = inf;
    return pv;
  }
  pv.value = green_eval(image, 1.0 / dz);
  return pv;
}

inline PoleValue green_eval_finite_pole(const FiniteGapSet& set, cplx z, double lambda0, double min_dist = 1e-8) {
  if (set.distance(lambda0) < min_dist) throw IllConditioned("pole too close to the set");
  return green_eval_finite_pole(green_data(invert_set(set, lambda0)), z, lambda0);
}

// Independent route for G_E(z, λ0): G = Re ∫_e^z Ω with
// Ω(t) = R(t)/((t-λ0)√Q(t)), deg R <= g, e a band edge. The gap periods
// vanish (principal value across the gap holding λ0) and R(λ0) = -√Q(λ0)
// fixes the residue at -1.
class FinitePoleGreen {
 public:
  FinitePoleGreen(FiniteGapSet set, double lambda0) : set_(std::move(set)), lambda0_(lambda0) {
    if (set_.unbounded) throw InvalidInput("Green's function needs a bounded set");
    if (set_.distance(lambda0_) < 1e-8) throw IllConditioned("pole too close to the set");
    bands_ = set_.bands();
    edges_ = set_.endpoints();
    c0_ = 0.5 * (set_.e0 + set_.e_inf);
    h_ = 0.5 * set_.diameter();
    solve();
    // Base edge on the far side from the pole, integrated outwards.
    base_ = lambda0_ < set_.e0 ? set_.e_inf : set_.e0;
    dir_ = lambda0_ < set_.e0 ? 1.0 : -1.0;
    const double L = set_.diameter();
    auto r = integrate([&](double u) -> cplx {
      if (u <= 0.0 || u >= 1.0) return 0.0;
      const double w = u / (1.0 - u);
      const double off = L * w * w;
      const double jac = 2.0 * L * w / ((1.0 - u) * (1.0 - u));
      return omega_offset(base_, dir_ * off) * dir_ * jac;
    }, 0.0, 1.0, {1e-16, 1e-14, 4000});
    phi_inf_ = r.value;
  }

  double value(cplx z) const {
    if (z.imag() < 0.0) z = std::conj(z);
    if (z.imag() == 0.0 && set_.contains(z.real())) return 0.0;
    if (z == cplx(lambda0_)) return inf;
    const double L = set_.diameter();
    auto r = integrate([&](double v) -> cplx {
      if (v >= 1.0) return 0.0;
      const double w = v / (1.0 - v);
      const double tau = L * w * w;
      const double jac = 2.0 * L * w / ((1.0 - v) * (1.0 - v));
      return omega(z + I * tau) * I * jac;
    }, 0.0, 1.0, {1e-15, 1e-14, 4000});
    return std::max(0.0, (phi_inf_ - r.value).real());
  }

 private:
  double r_poly(double t) const {
    const double u = (t - c0_) / h_;
    double v = 0.0;
    for (std::size_t k = coef_.size(); k-- > 0;) v = v * u + coef_[k];
    return v;
  }
  cplx r_poly(cplx t) const {
    const cplx u = (t - c0_) / h_;
    cplx v = 0.0;
    for (std::size_t k = coef_.size(); k-- > 0;) v = v * u + coef_[k];
    return v;
  }
  cplx omega(cplx t) const { return r_poly(t) / ((t - lambda0_) * detail::sqrt_q(bands_, t)); }
  // Ω(a + off) with edge distances formed before adding; off real, upper side.
  cplx omega_offset(double a, double off) const {
    cplx q = 1.0;
    for (const auto& b : bands_)
      q *= std::sqrt(cplx((a - b.lo) + off, 0.0)) * std::sqrt(cplx((a - b.hi) + off, 0.0));
    return r_poly(a + off) / (((a - lambda0_) + off) * q);
  }

  void solve() {
    const std::size_t g = set_.genus();
    std::vector<double> prev;
    for (int n = 16; n <= (1 << 16); n *= 2) {
      std::vector<std::vector<double>> a(g + 1, std::vector<double>(g + 1, 0.0));
      std::vector<double> rhs(g + 1, 0.0);
      auto basis = [&](double t, std::vector<double>& out) {
        const double u = (t - c0_) / h_;
        double p = 1.0;
        for (std::size_t k = 0; k <= g; ++k) {
          out[k] = p;
          p *= u;
        }
      };
      std::vector<double> bt(g + 1), b0(g + 1);
      for (std::size_t j = 0; j < g; ++j) {
        const double lo = set_.gaps[j].lo, hi = set_.gaps[j].hi;
        const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        const bool holds_pole = lambda0_ > lo && lambda0_ < hi;
        double w0 = 0.0;
        if (holds_pole) {
          w0 = 1.0 / detail::rest_weight(edges_, 2 * j + 1, lambda0_);
          basis(lambda0_, b0);
        }
        for (int i = 0; i < n; ++i) {
          const double t = mid + hw * std::cos((2.0 * i + 1.0) * pi / (2.0 * n));
          const double w = 1.0 / detail::rest_weight(edges_, 2 * j + 1, t);
          basis(t, bt);
          for (std::size_t k = 0; k <= g; ++k) {
            if (holds_pole)
              a[j][k] += (t == lambda0_) ? 0.0 : (bt[k] * w - b0[k] * w0) / (t - lambda0_);
            else
              a[j][k] += bt[k] * w / (t - lambda0_);
          }
        }
      }
      basis(lambda0_, b0);
      for (std::size_t k = 0; k <= g; ++k) a[g][k] = b0[k];
      rhs[g] = -detail::sqrt_q(bands_, cplx(lambda0_, 0.0)).real();
      auto coef = detail::solve_dense(a, rhs, 1e-14);
      bool done = !prev.empty();
      for (std::size_t k = 0; k <= g && done; ++k)
        if (std::abs(coef[k] - prev[k]) > 1e-13 * std::max(1.0, std::abs(coef[k]))) done = false;
      prev = coef;
      if (done || g == 0) break;
    }
    coef_ = prev;
  }

  FiniteGapSet set_;
  double lambda0_;
  std::vector<Interval> bands_;
  std::vector<double> edges_;
  double c0_ = 0.0, h_ = 1.0;
  std::vector<double> coef_;
  double base_ = 0.0, dir_ = 1.0;
  cplx phi_inf_ = 0.0;
};

inline PoleValue green_eval_finite_pole_direct(const FiniteGapSet& set, cplx z, double lambda0,
                                               double pole_flag = 1e-4) {
  PoleValue pv;
  pv.near_pole = std::abs(z - lambda0) < pole_flag;
  pv.value = FinitePoleGreen(set, lambda0).value(z);
  return pv;
}

// ---------------------------------------------------------------------------
// Blaschke-type sums

enum class SeriesClass { Converged, Divergent, Undecided };

inline std::string to_string(SeriesClass c) {
  switch (c) {
    case SeriesClass::Converged: return "CONVERGED";
    case SeriesClass::Divergent: return "DIVERGENT";
    default: return "UNDECIDED";
  }
}

struct BlaschkeOptions {
  int fit_terms = 10;
  double converged_above = 1.1;
  double divergent_below = 1.02;
};

struct BlaschkeResult {
  double partial_sum = 0.0;
  SeriesClass classification = SeriesClass::Converged;
  std::optional<double> fitted_power;
  double tail_estimate = 0.0;
  std::vector<double> terms;
};

// Classify from the term sequence: finite lists are trivially summable;
// generated sequences get a k^{-p} fit over their last terms.
inline BlaschkeResult classify_terms(std::vector<double> terms, bool from_generator, BlaschkeOptions opt = {}) {
  BlaschkeResult res;
  res.terms = std::move(terms);
  for (double t : res.terms) res.partial_sum += t;
  if (!from_generator) return res;
  const int n = static_cast<int>(res.terms.size());
  if (n < opt.fit_terms + 1) {
    res.classification = SeriesClass::Undecided;
    return res;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int k = n - opt.fit_terms; k < n; ++k) {
    const double t = res.terms[k];
    if (!(t > 0.0)) continue;
    const double x = std::log(k + 1.0), y = std::log(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 3) {
    // Terms vanish identically: nothing left to sum.
    res.classification = SeriesClass::Converged;
    return res;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double c = std::exp((sy - slope * sx) / m);
  const double p = -slope;
  res.fitted_power = p;
  if (p > opt.converged_above) {
    res.classification = SeriesClass::Converged;
    res.tail_estimate = c * std::pow(static_cast<double>(n), 1.0 - p) / (p - 1.0);
  } else if (p < opt.divergent_below) {
    res.classification = SeriesClass::Divergent;
    res.tail_estimate = inf;
  } else {
    res.classification = SeriesClass::Undecided;
  }
  return res;
}

struct Pole {
  enum Kind { Infinity, Finite } kind = Infinity;
  double at = 0.0;
};

inline std::vector<double> green_terms(const FiniteGapSet& set, const std::vector<double>& points, Pole pole) {
  for (double x : points)
    if (set.contains(x)) throw InvalidInput("Blaschke point lies on the set");
  std::vector<double> out;
  if (points.empty()) return out;
  if (pole.kind == Pole::Infinity) {
    auto gd = green_data(set);
    for (double x : points) out.push_back(green_eval(gd, x));
  } else {
    auto img = green_data(invert_set(set, pole.at));
    for (double x : points) out.push_back(green_eval_finite_pole(img, x, pole.at).value);
  }
  return out;
}

inline BlaschkeResult blaschke_sum(const FiniteGapSet& set, const std::vector<double>& points, Pole pole = {},
                                   BlaschkeOptions opt = {}) {
  return classify_terms(green_terms(set, points, pole), false, opt);
}

inline BlaschkeResult blaschke_sum(const FiniteGapSet& set, const std::function<double(int)>& generator, int count,
                                   Pole pole = {}, BlaschkeOptions opt = {}) {
  std::vector<double> pts;
  for (int k = 1; k <= count; ++k) pts.push_back(generator(k));
  return classify_terms(green_terms(set, pts, pole), true, opt);
}

// ---------------------------------------------------------------------------
// Circle sets to the line

// Image of the kept arcs under λ = -cot((θ-θ0)/2), the inverse of
// w(z) = e^{iθ0}(z-i)/(z+i).
inline FiniteGapSet arcs_to_line(const ArcSet& set, double theta0) {
  if (set.is_full() || set.contains(theta0)) throw InvalidInput("ζ0 lies on the set");
  std::vector<Interval> img;
  for (const auto& k : set.kept()) {
    const double shift = wrap_angle(k.lo - theta0) + theta0 - k.lo;
    img.push_back({angle_to_line(k.lo + shift, theta0), angle_to_line(k.hi + shift, theta0)});
  }
  return FiniteGapSet::from_bands(img);
}

inline BlaschkeResult blaschke_sum(const ArcSet& set, const std::vector<double>& angles, double theta0,
                                   BlaschkeOptions opt = {}) {
  auto line = arcs_to_line(set, theta0);
  std::vector<double> pts;
  for (double t : angles) {
    if (set.contains(t)) throw InvalidInput("Blaschke point lies on the set");
    pts.push_back(angle_to_line(t, theta0));
  }
  return classify_terms(green_terms(line, pts, {}), false, opt);
}

}  // namespace refless
