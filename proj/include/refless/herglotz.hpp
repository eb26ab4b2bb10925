#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "common.hpp"
#include "measure.hpp"
#include "quadrature.hpp"

namespace refless {

using AnalyticFn = std::function<cplx(cplx)>;

namespace detail {

inline QuadOptions kernel_quad() { return {1e-14, 1e-13, 6000}; }

// ∫ dν/(λ-z) for the reference measure of a piece: dλ for Regular pieces,
// dλ/sqrt((λ-lo)(hi-λ)) for InverseSqrt ones. Im z > 0.
inline cplx reference_stieltjes(const AcPiece& p, cplx z) {
  if (p.edge == Edge::Regular) return std::log(cplx(p.hi) - z) - std::log(cplx(p.lo) - z);
  return -pi / (std::sqrt(z - p.lo) * std::sqrt(z - p.hi));
}

// ∫ ρ(λ)/(λ-z) dλ over one piece, Im z >= 0. When Re z sits inside the piece
// the smooth factor at Re z is subtracted and added back in closed form. Very
// close to the axis the remainder is written through the difference quotient
// D(λ) = (h(λ)-h(x))/(λ-x), which has no feature of width Im z to resolve.
inline cplx stieltjes_piece(const AcPiece& p, cplx z) {
  const double x = z.real(), y = z.imag();
  const double len = p.hi - p.lo;
  const bool inside = x > p.lo && x < p.hi;
  if (!inside || y >= len) {
    std::vector<double> br;
    if (inside) br.push_back(x);
    return p.integrate_against([z](double l) -> cplx { return 1.0 / (l - z); }, kernel_quad(), br).value;
  }
  const double hx = p.smooth(x);
  const cplx ref = hx * reference_stieltjes(p, z);
  if (y >= 1e-9 * len) {
    auto f = [&](double l) -> cplx { return (p.smooth(l) - hx) / (l - z); };
    return p.integrate_reference(f, kernel_quad(), {x}).value + ref;
  }
  auto dq = [&](double l) { return l == x ? 0.0 : (p.smooth(l) - hx) / (l - x); };
  const double body = p.integrate_reference(dq, kernel_quad(), {x}).value;
  const double h = 1e-6 * len;
  const double xl = std::max(x - h, p.lo), xr = std::min(x + h, p.hi);
  const double slope = (p.smooth(xr) - p.smooth(xl)) / (xr - xl);
  return body + I * y * slope * reference_stieltjes(p, z) + ref;
}

// ∫_{θa}^{θb} (e^{iθ}+z)/(e^{iθ}-z) dθ in closed form, |z| < 1.
inline cplx arc_kernel_integral(double ta, double tb, cplx z) {
  const double r = std::abs(z);
  const double phi = std::arg(z);
  auto re_prim = [r](double u) { return 2.0 * std::atan2((1.0 + r) * std::sin(0.5 * u), (1.0 - r) * std::cos(0.5 * u)); };
  auto logd = [r](double u) { return std::log(1.0 - 2.0 * r * std::cos(u) + r * r); };
  double ua = ta - phi;
  ua = wrap_angle(ua + pi) - pi;  // (-π, π]
  double ub = ua + (tb - ta);
  double re;
  if (ub <= pi)
    re = re_prim(ub) - re_prim(ua);
  else
    re = (pi - re_prim(ua)) + (re_prim(ub - 2.0 * pi) + pi);
  const double im = -(logd(ub) - logd(ua));
  return {re, im};
}

inline cplx caratheodory_piece(const AcPiece& p, cplx z) {
  auto kernel = [z](double t) {
    cplx s = std::polar(1.0, t);
    return (s + z) / (s - z);
  };
  const double r = std::abs(z);
  const double phi = r > 0 ? std::arg(z) : 0.0;
  double off = wrap_angle(phi - p.lo);
  const bool inside = r > 0.5 && off < p.hi - p.lo;
  if (inside && p.edge == Edge::Regular) {
    const double t0 = p.lo + off;
    const double rho = p.density(t0);
    auto f = [&](double t) -> cplx { return (p.density(t) - rho) * kernel(t); };
    cplx s = integrate_band(f, p.lo, p.hi, kernel_quad(), {t0}).value;
    return s + rho * arc_kernel_integral(p.lo, p.hi, z);
  }
  return p.integrate_against(kernel, kernel_quad()).value;
}

}  // namespace detail

// Which kernel the measure integral uses. Nevanlinna is the general
// representation c + d z + ∫(1/(λ-z) - λ/(1+λ²)) dω; Stieltjes drops the
// convergence term and suits finite measures, as produced by the transport
// lemmas and by diagonal Green's functions.
enum class Kernel { Nevanlinna, Stieltjes };

class HerglotzFunction {
 public:
  HerglotzFunction() = default;
  HerglotzFunction(double c, double d, SpectralMeasure mu, Kernel k = Kernel::Nevanlinna)
      : c_(c), d_(d), mu_(std::move(mu)), kernel_(k) {
    if (mu_.space != Space::Line) throw InvalidInput("Herglotz function needs a line measure");
    if (d_ < 0.0) throw InvalidInput("negative slope");
    mu_.validate();
    if (kernel_ == Kernel::Nevanlinna) {
      for (const auto& a : mu_.atoms) shift_ += a.weight * a.position / (1.0 + a.position * a.position);
      for (const auto& p : mu_.ac)
        shift_ += p.integrate_against([](double l) { return l / (1.0 + l * l); }).value;
    }
  }

  double c() const { return c_; }
  double slope() const { return d_; }
  const SpectralMeasure& measure() const { return mu_; }
  Kernel kernel() const { return kernel_; }

  cplx operator()(cplx z) const { return eval(z); }

  cplx eval(cplx z) const {
    if (z.imag() < 0.0) return std::conj(eval(std::conj(z)));
    if (z.imag() == 0.0) {
      for (const auto& a : mu_.atoms)
        if (std::abs(z.real() - a.position) < off_support_tol) throw PoleError("evaluation at an atom");
      if (mu_.distance_to_support(z.real()) < off_support_tol)
        throw InvalidInput("real point on the support; use a boundary value");
    }
    cplx s = c_ + d_ * z - shift_;
    for (const auto& a : mu_.atoms) s += a.weight / (a.position - z);
    for (const auto& p : mu_.ac) s += detail::stieltjes_piece(p, z);
    return s;
  }

  AnalyticFn as_function() const {
    return [self = *this](cplx z) { return self.eval(z); };
  }

 private:
  double c_ = 0.0, d_ = 0.0;
  SpectralMeasure mu_;
  Kernel kernel_ = Kernel::Nevanlinna;
  double shift_ = 0.0;
};

class CaratheodoryFunction {
 public:
  CaratheodoryFunction() : mu_{Space::Circle, {}, {}, true} {}
  CaratheodoryFunction(double c, SpectralMeasure mu) : c_(c), mu_(std::move(mu)) {
    if (mu_.space != Space::Circle) throw InvalidInput("Caratheodory function needs a circle measure");
    mu_.validate();
  }

  double c() const { return c_; }
  const SpectralMeasure& measure() const { return mu_; }

  cplx operator()(cplx z) const { return eval(z); }

  cplx eval(cplx z) const {
    const double r = std::abs(z);
    if (r > 1.0) return -std::conj(eval(1.0 / std::conj(z)));
    if (r == 1.0 && mu_.distance_to_support(std::arg(z)) < off_support_tol)
      throw InvalidInput("unit-circle point on the support; use a boundary value");
    cplx s = I * c_;
    for (const auto& a : mu_.atoms) {
      cplx q = std::polar(1.0, a.position);
      s += a.weight * (q + z) / (q - z);
    }
    for (const auto& p : mu_.ac) {
      if (r == 1.0) {
        auto k = [z](double t) -> cplx {
          cplx q = std::polar(1.0, t);
          return (q + z) / (q - z);
        };
        s += p.integrate_against(k, detail::kernel_quad()).value;
      } else {
        s += detail::caratheodory_piece(p, z);
      }
    }
    return s;
  }

  AnalyticFn as_function() const {
    return [self = *this](cplx z) { return self.eval(z); };
  }

 private:
  double c_ = 0.0;
  SpectralMeasure mu_;
};

}  // namespace refless
