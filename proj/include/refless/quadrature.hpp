#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <utility>
#include <vector>

#include "common.hpp"

namespace refless {

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(cplx v) { return std::abs(v); }
inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss7_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class F>
Segment<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fc = f(c);
  T k = fc * kronrod_w[7];
  T g = fc * gauss7_w[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    T s = f(c - dx) + f(c + dx);
    k += s * kronrod_w[j];
    if (j % 2 == 1) g += s * gauss7_w[j / 2];
  }
  return {a, b, k * h, magnitude((k - g) * h)};
}

}  // namespace detail

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  bool converged = false;
  int intervals = 0;
};

struct QuadOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

// Globally adaptive Gauss-Kronrod on [a, b]. `breaks` are interior points
// the integrand is known to be rough at; they seed the initial partition.
template <class F>
auto integrate(F f, double a, double b, QuadOptions opt = {}, const std::vector<double>& breaks = {}) {
  using T = std::decay_t<decltype(f(a))>;
  QuadResult<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    auto s = detail::gk15<T>(f, cuts[i], cuts[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  while (!heap.empty()) {
    double tol = std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
    if (err <= tol) {
      out.converged = true;
      break;
    }
    if (static_cast<int>(heap.size()) >= opt.max_intervals) break;
    auto s = heap.top();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) break;
    heap.pop();
    auto l = detail::gk15<T>(f, s.a, mid);
    auto r = detail::gk15<T>(f, mid, s.b);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  // Resum to shed the drift of the incremental updates.
  T sum{};
  double esum = 0.0;
  out.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  out.value = sum * sign;
  out.error = esum;
  if (!out.converged) out.converged = esum <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum));
  return out;
}

// ∫_a^b f(λ) dλ for integrands that may blow up like an inverse square root
// at either endpoint: λ = mid - half*cos θ turns that into a smooth integrand.
template <class F>
auto integrate_band(F f, double a, double b, QuadOptions opt = {}, const std::vector<double>& breaks = {}) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto g = [&](double t) {
    const double x = mid - half * std::cos(t);
    auto v = f(x);
    using T = decltype(v);
    // Nodes within rounding of an endpoint land on it exactly; the sin t
    // weight vanishes there faster than an inverse square root grows.
    if ((x <= a || x >= b) && !detail::finite(v)) return T{};
    return v * (half * std::sin(t));
  };
  std::vector<double> tb;
  for (double x : breaks)
    if (x > a && x < b) tb.push_back(std::acos(std::clamp((mid - x) / half, -1.0, 1.0)));
  return integrate(g, 0.0, pi, opt, tb);
}

// ∫_a^∞ f(t) dt through t = a + L (u/(1-u))^2; the square removes an inverse
// square-root singularity at t = a.
template <class F>
auto integrate_to_infinity(F f, double a, double scale, QuadOptions opt = {}) {
  auto g = [&](double u) {
    using T = std::decay_t<decltype(f(a))>;
    if (u >= 1.0) return T{};
    const double w = u / (1.0 - u);
    const double t = a + scale * w * w;
    // An integrable edge singularity at a is killed by the Jacobian.
    if (t == a) return T{};
    const double jac = 2.0 * scale * w / ((1.0 - u) * (1.0 - u));
    return f(t) * jac;
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace refless
