#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "herglotz.hpp"

namespace refless {

struct Ladder {
  std::vector<double> eps;

  static Ladder geometric(int k_first = 10, int k_last = 40) {
    Ladder l;
    for (int k = k_first; k <= k_last; ++k) l.eps.push_back(std::ldexp(1.0, -k));
    return l;
  }
  void validate() const {
    if (eps.size() < 3) throw InvalidInput("ladder needs at least three rungs");
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (!(eps[i] > 0.0)) throw InvalidInput("ladder rungs must be positive");
      if (i && !(eps[i] < eps[i - 1])) throw InvalidInput("ladder must decrease strictly");
    }
  }
};

// Default ladders. Radial approach stops a little earlier: the Schur
// recursions lose digits as |z| -> 1 faster than the line recursions do.
inline Ladder default_line_ladder() { return Ladder::geometric(10, 40); }
inline Ladder default_circle_ladder() { return Ladder::geometric(10, 34); }

struct BoundaryOptions {
  double tol = 1e-8;             // relative agreement of the last two rungs
  double overflow_guard = 1e8;   // beyond this the limit is declared infinite
};

struct BoundaryValue {
  cplx value{};
  bool infinite = false;
  bool converged = false;
  std::vector<std::pair<double, cplx>> approach;
};

// Limit of path(ε) as ε -> 0 along the ladder. The returned value is the
// two-point linear extrapolation from the last two rungs.
inline BoundaryValue limit_along(const std::function<cplx(double)>& path, const Ladder& ladder,
                                 BoundaryOptions opt = {}) {
  ladder.validate();
  BoundaryValue bv;
  for (double e : ladder.eps) bv.approach.emplace_back(e, path(e));
  const std::size_t n = bv.approach.size();
  const auto [e1, v1] = bv.approach[n - 2];
  const auto [e2, v2] = bv.approach[n - 1];
  if (!is_finite(v2) || std::abs(v2) > opt.overflow_guard) {
    bv.infinite = bv.converged = true;
    bv.value = cplx(inf, 0.0);
    return bv;
  }
  // Steady growth over the last rungs also signals an infinite limit, even
  // when the guard has not been crossed yet (small atoms).
  if (std::abs(v2) > 1e3) {
    bool growing = true;
    for (std::size_t k = n - 5; k < n; ++k)
      if (!(std::abs(bv.approach[k].second) > 1.2 * std::abs(bv.approach[k - 1].second))) growing = false;
    if (growing) {
      bv.infinite = bv.converged = true;
      bv.value = cplx(inf, 0.0);
      return bv;
    }
  }
  bv.value = (e1 * v2 - e2 * v1) / (e1 - e2);
  bv.converged = std::abs(v2 - v1) <= opt.tol * std::max(1.0, std::abs(v2));
  return bv;
}

inline BoundaryValue boundary_value_line(const AnalyticFn& fn, double lambda, const Ladder& ladder = default_line_ladder(),
                                         BoundaryOptions opt = {}) {
  return limit_along([&](double e) { return fn(cplx(lambda, e)); }, ladder, opt);
}

// Radial limit at e^{iθ}: z = (1-ε) e^{iθ}.
inline BoundaryValue boundary_value_circle(const AnalyticFn& fn, double theta,
                                           const Ladder& ladder = default_circle_ladder(), BoundaryOptions opt = {}) {
  const cplx zeta = std::polar(1.0, theta);
  return limit_along([&](double e) { return fn((1.0 - e) * zeta); }, ladder, opt);
}

enum class PointClass { AC, Singular, SC, PP, OutsideSupport, Indeterminate };

inline std::string to_string(PointClass k) {
  switch (k) {
    case PointClass::AC: return "AC";
    case PointClass::Singular: return "SINGULAR";
    case PointClass::SC: return "SC";
    case PointClass::PP: return "PP";
    case PointClass::OutsideSupport: return "OUTSIDE_SUPPORT";
    default: return "INDETERMINATE";
  }
}

struct Classification {
  PointClass kind = PointClass::Indeterminate;
  double mass = 0.0;  // point-mass indicator limit
  BoundaryValue bv;
  BoundaryValue indicator;
};

struct ClassifyOptions {
  double ac_tol = 1e-10;    // Im (line) or Re (circle) below this counts as zero
  double mass_tol = 1e-10;  // indicator below this counts as no atom
  BoundaryOptions bv{};
};

namespace detail {

inline Classification classify_from(const BoundaryValue& bv, const BoundaryValue& ind, double density_part,
                                    const ClassifyOptions& opt) {
  Classification c;
  c.bv = bv;
  c.indicator = ind;
  c.mass = ind.infinite ? inf : ind.value.real();
  if (bv.infinite) {
    if (ind.converged && !ind.infinite && c.mass > opt.mass_tol)
      c.kind = PointClass::PP;
    else if (ind.converged && !ind.infinite)
      c.kind = PointClass::SC;
    else
      c.kind = PointClass::Singular;
    return c;
  }
  if (!bv.converged) return c;
  c.kind = density_part > opt.ac_tol ? PointClass::AC : PointClass::OutsideSupport;
  return c;
}

}  // namespace detail

// Line: the indicator is (-iε) m(λ+iε), whose limit is the atom weight at λ.
inline Classification classify_line(const AnalyticFn& m, double lambda, const Ladder& ladder = default_line_ladder(),
                                    ClassifyOptions opt = {}) {
  auto bv = boundary_value_line(m, lambda, ladder, opt.bv);
  BoundaryOptions io = opt.bv;
  io.tol = std::max(io.tol, 1e-6);
  auto ind = limit_along([&](double e) { return -I * e * m(cplx(lambda, e)); }, ladder, io);
  return detail::classify_from(bv, ind, bv.value.imag(), opt);
}

// Circle: the indicator is ((1-r)/2) f(rζ).
inline Classification classify_circle(const AnalyticFn& f, double theta, const Ladder& ladder = default_circle_ladder(),
                                      ClassifyOptions opt = {}) {
  auto bv = boundary_value_circle(f, theta, ladder, opt.bv);
  const cplx zeta = std::polar(1.0, theta);
  BoundaryOptions io = opt.bv;
  io.tol = std::max(io.tol, 1e-6);
  auto ind = limit_along([&](double e) { return 0.5 * e * f((1.0 - e) * zeta); }, ladder, io);
  return detail::classify_from(bv, ind, bv.value.real(), opt);
}

inline Classification classify_point(const HerglotzFunction& m, double lambda, ClassifyOptions opt = {}) {
  return classify_line(m.as_function(), lambda, default_line_ladder(), opt);
}
inline Classification classify_point(const CaratheodoryFunction& f, double theta, ClassifyOptions opt = {}) {
  return classify_circle(f.as_function(), theta, default_circle_ladder(), opt);
}

}  // namespace refless
