#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "common.hpp"
#include "sets.hpp"

namespace refless {

enum class Side { Plus, Minus };

// Jacobi coefficients: explicit values on the core window [n_min, n_min+len)
// and periodic tails outside it. Tails are anchored to the absolute index,
// a(n) = tail.a[n mod p], so a periodic operator is an empty core with the
// same tail on both sides. Free tails are the period-one tail a=1, b=0.
struct JacobiTail {
  std::vector<double> a{1.0}, b{0.0};

  static JacobiTail free() { return {}; }
  static JacobiTail constant(double a, double b) { return {{a}, {b}}; }
  static JacobiTail periodic(std::vector<double> a, std::vector<double> b) { return {std::move(a), std::move(b)}; }

  std::size_t period() const { return a.size(); }
  static std::size_t slot(long n, std::size_t p) {
    const long r = n % static_cast<long>(p);
    return static_cast<std::size_t>(r < 0 ? r + static_cast<long>(p) : r);
  }
  double a_at(long n) const { return a[slot(n, period())]; }
  double b_at(long n) const { return b[slot(n, period())]; }
  bool operator==(const JacobiTail&) const = default;
};

struct JacobiCoefficients {
  long n_min = 0;
  std::vector<double> a_core, b_core;
  JacobiTail left, right;

  static JacobiCoefficients free() { return {}; }
  static JacobiCoefficients periodic(std::vector<double> a, std::vector<double> b) {
    JacobiCoefficients c;
    c.left = c.right = JacobiTail::periodic(std::move(a), std::move(b));
    c.validate();
    return c;
  }

  long n_max() const { return n_min + static_cast<long>(b_core.size()) - 1; }
  bool in_core(long n) const { return n >= n_min && n <= n_max(); }

  double a(long n) const {
    if (in_core(n)) return a_core[static_cast<std::size_t>(n - n_min)];
    return n < n_min ? left.a_at(n) : right.a_at(n);
  }
  double b(long n) const {
    if (in_core(n)) return b_core[static_cast<std::size_t>(n - n_min)];
    return n < n_min ? left.b_at(n) : right.b_at(n);
  }

  void validate() const {
    if (a_core.size() != b_core.size()) throw InvalidInput("core a and b need equal length");
    for (const auto* t : {&left, &right}) {
      if (t->a.empty() || t->a.size() != t->b.size()) throw InvalidInput("tail a and b need equal nonzero length");
      for (double v : t->a)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("a(n) must be positive");
      for (double v : t->b)
        if (!std::isfinite(v)) throw InvalidInput("b(n) must be finite");
    }
    for (double v : a_core)
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("a(n) must be positive");
    for (double v : b_core)
      if (!std::isfinite(v)) throw InvalidInput("b(n) must be finite");
  }

  // Same operator viewed from index n + k: shifted(k).a(n) = a(n + k).
  JacobiCoefficients shifted(long k) const {
    JacobiCoefficients c = *this;
    c.n_min -= k;
    auto rot = [k](JacobiTail t) {
      const std::size_t p = t.period();
      JacobiTail r = t;
      for (std::size_t i = 0; i < p; ++i) {
        r.a[i] = t.a_at(static_cast<long>(i) + k);
        r.b[i] = t.b_at(static_cast<long>(i) + k);
      }
      return r;
    };
    c.left = rot(left);
    c.right = rot(right);
    return c;
  }

  bool operator==(const JacobiCoefficients&) const = default;
};

namespace detail {

// 2x2 complex matrix acting on m by the Möbius map (A m + B)/(C m + D).
struct Mob {
  cplx A = 1.0, B = 0.0, C = 0.0, D = 1.0;
  cplx apply(cplx m) const { return (A * m + B) / (C * m + D); }
  Mob after(const Mob& o) const {  // this ∘ o
    return {A * o.A + B * o.C, A * o.B + B * o.D, C * o.A + D * o.C, C * o.B + D * o.D};
  }
  cplx det() const { return A * D - B * C; }
};

// Fixed point of a Möbius map for the periodic tail, Im z > 0. The Weyl
// root is Herglotz; when both candidates sit on the same side (rounding near
// the real axis) the attracting one is taken.
inline cplx herglotz_fixed_point(const Mob& t) {
  if (std::abs(t.C) == 0.0) return t.B / (t.D - t.A);
  const cplx disc = std::sqrt((t.D - t.A) * (t.D - t.A) + 4.0 * t.B * t.C);
  const cplx r1 = (t.A - t.D + disc) / (2.0 * t.C);
  const cplx r2 = (t.A - t.D - disc) / (2.0 * t.C);
  const bool u1 = r1.imag() > 0.0, u2 = r2.imag() > 0.0;
  if (u1 != u2) return u1 ? r1 : r2;
  auto slope = [&](cplx m) { return std::abs(t.det() / ((t.C * m + t.D) * (t.C * m + t.D))); };
  return slope(r1) < slope(r2) ? r1 : r2;
}

}  // namespace detail

// m_+(z,n) = 1/(b(n) - z - a(n)² m_+(z,n+1)),
// m_-(z,n) = 1/(b(n) - z - a(n-1)² m_-(z,n-1)).
inline cplx m_halflattice(const JacobiCoefficients& c, Side side, long n0, cplx z) {
  if (z.imag() == 0.0) throw InvalidInput("m-function needs Im z != 0; use a boundary ladder");
  if (z.imag() < 0.0) return std::conj(m_halflattice(c, side, n0, std::conj(z)));
  if (side == Side::Plus) {
    const long start = std::max(n0, c.n_max() + 1);
    const std::size_t p = c.right.period();
    detail::Mob t;
    for (long k = start + static_cast<long>(p) - 1; k >= start; --k) {
      const double a = c.a(k);
      t = detail::Mob{0.0, 1.0, -a * a, c.b(k) - z}.after(t);
    }
    cplx m = detail::herglotz_fixed_point(t);
    for (long k = start - 1; k >= n0; --k) m = 1.0 / (c.b(k) - z - c.a(k) * c.a(k) * m);
    return m;
  }
  const long start = std::min(n0, c.n_min - 1);
  const std::size_t p = c.left.period();
  detail::Mob t;
  for (long k = start - static_cast<long>(p) + 1; k <= start; ++k) {
    const double a = c.a(k - 1);
    t = detail::Mob{0.0, 1.0, -a * a, c.b(k) - z}.after(t);
  }
  cplx m = detail::herglotz_fixed_point(t);
  for (long k = start + 1; k <= n0; ++k) m = 1.0 / (c.b(k) - z - c.a(k - 1) * c.a(k - 1) * m);
  return m;
}

// M_+ = -1/m_+ - z + b(n0), M_- = 1/m_-.
inline cplx M_pm(const JacobiCoefficients& c, Side side, long n0, cplx z) {
  const cplx m = m_halflattice(c, side, n0, z);
  if (m == 0.0) throw PoleError("m-function vanishes");
  return side == Side::Plus ? -1.0 / m - z + c.b(n0) : 1.0 / m;
}

inline cplx green_diag(const JacobiCoefficients& c, long n, cplx z) {
  const cplx d = M_pm(c, Side::Minus, n, z) - M_pm(c, Side::Plus, n, z);
  if (d == 0.0) throw PoleError("M_- = M_+");
  return 1.0 / d;
}

struct MatrixHerglotz {
  cplx m00, m01, m10, m11, trace;
};

// The 2x2 Herglotz matrix built from M_±(z,n0).
inline MatrixHerglotz matrix_herglotz(const JacobiCoefficients& c, long n0, cplx z) {
  const cplx mp = M_pm(c, Side::Plus, n0, z), mm = M_pm(c, Side::Minus, n0, z);
  const cplx d = mm - mp;
  if (d == 0.0) throw PoleError("M_- = M_+");
  MatrixHerglotz h;
  h.m00 = 1.0 / d;
  h.m01 = h.m10 = 0.5 * (mm + mp) / d;
  h.m11 = mm * mp / d;
  h.trace = (1.0 + mm * mp) / d;
  return h;
}

// ---------------------------------------------------------------------------
// Boundary diagnostics

struct XiValue {
  double value = 0.0;
  bool decided = false;
  BoundaryValue bv;
};

namespace detail {

// (1/π) Arg w with the argument pinned to [0, π]: the functions fed here are
// Herglotz, so a negative imaginary part is rounding.
inline double upper_arg_over_pi(cplx w) { return std::atan2(std::max(w.imag(), 0.0), w.real()) / pi; }

inline XiValue xi_from(const std::function<cplx(double)>& path, const Ladder& ladder, double clamp_tol) {
  XiValue x;
  BoundaryOptions opt;
  opt.tol = 1e-8;
  x.bv = limit_along([&](double e) { return cplx(upper_arg_over_pi(path(e)), 0.0); }, ladder, opt);
  x.decided = x.bv.converged && !x.bv.infinite;
  double v = x.bv.value.real();
  if (v < -clamp_tol || v > 1.0 + clamp_tol) x.decided = false;
  x.value = std::clamp(v, 0.0, 1.0);
  return x;
}

}  // namespace detail

// ξ(λ,n) = (1/π) Arg g(λ+i0,n), taken as the limit of the argument.
inline XiValue xi_function(const JacobiCoefficients& c, long n, double lambda,
                           const Ladder& ladder = default_line_ladder()) {
  return detail::xi_from([&](double e) { return green_diag(c, n, cplx(lambda, e)); }, ladder, 1e-6);
}

struct Defect {
  double sup = 0.0;
  double decided_sup = 0.0;  // sup over points whose boundary values converged
  double mean = 0.0;
  double worst_point = 0.0;
  int evaluated = 0;
  int skipped = 0;
  int undecided = 0;
};

// Interior grid over the bands of a set: `count` points spread in
// proportion to band length, each band trimmed by `margin` (relative).
inline std::vector<double> band_grid(const FiniteGapSet& set, int count, double margin = 1e-3) {
  std::vector<double> out;
  const auto bands = set.bands();
  const double total = set.measure();
  int left = count;
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    int k = i + 1 == bands.size() ? left : static_cast<int>(std::lround(count * b.length() / total));
    k = std::clamp(k, 0, left);
    left -= k;
    const double lo = b.lo + margin * b.length(), hi = b.hi - margin * b.length();
    for (int j = 0; j < k; ++j) out.push_back(k == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (k - 1.0));
  }
  return out;
}

namespace detail {

template <class F>
Defect aggregate_defect(const std::vector<double>& grid, const std::function<bool(double)>& admissible, F defect_at) {
  Defect d;
  double total = 0.0;
  for (double x : grid) {
    if (!admissible(x)) {
      ++d.skipped;
      continue;
    }
    auto [v, ok] = defect_at(x);
    if (!ok) ++d.undecided;
    else d.decided_sup = std::max(d.decided_sup, v);
    ++d.evaluated;
    total += v;
    if (d.evaluated == 1 || v > d.sup) {
      d.sup = v;
      d.worst_point = x;
    }
  }
  d.mean = d.evaluated ? total / d.evaluated : 0.0;
  return d;
}

}  // namespace detail

// sup and mean of |M_+(λ+i0) - conj(M_-(λ+i0))| over the grid points on E.
inline Defect reflectionless_defect(const JacobiCoefficients& c, long n0, const FiniteGapSet& set,
                                    const std::vector<double>& grid, const Ladder& ladder = default_line_ladder()) {
  return detail::aggregate_defect(grid, [&](double x) { return set.contains(x); }, [&](double x) {
    auto bp = boundary_value_line([&](cplx z) { return M_pm(c, Side::Plus, n0, z); }, x, ladder);
    auto bm = boundary_value_line([&](cplx z) { return M_pm(c, Side::Minus, n0, z); }, x, ladder);
    const bool ok = bp.converged && bm.converged && !bp.infinite && !bm.infinite;
    const double v = ok ? std::abs(bp.value - std::conj(bm.value)) : inf;
    return std::pair{v, ok};
  });
}

enum class Multiplicity { Two, One, Outside, Undecided };

inline std::string to_string(Multiplicity m) {
  switch (m) {
    case Multiplicity::Two: return "MULT_TWO";
    case Multiplicity::One: return "MULT_ONE";
    case Multiplicity::Outside: return "OUTSIDE";
    default: return "UNDECIDED";
  }
}

// Multiplicity from the boundary values of the two half-line functions:
// both non-real gives two; equal real values, both infinite, or exactly one
// non-real gives one; anything else lies outside the spectrum.
inline Multiplicity multiplicity_from(const BoundaryValue& p, const BoundaryValue& m, double tol = 1e-6) {
  if (!p.converged || !m.converged) return Multiplicity::Undecided;
  if (p.infinite && m.infinite) return Multiplicity::One;
  auto nonreal = [tol](const BoundaryValue& b) {
    return !b.infinite && std::abs(b.value.imag()) > tol * std::max(1.0, std::abs(b.value));
  };
  const bool np = nonreal(p), nm = nonreal(m);
  if (np && nm) return Multiplicity::Two;
  if (np != nm) return (p.infinite || m.infinite) ? Multiplicity::Outside : Multiplicity::One;
  if (!p.infinite && !m.infinite &&
      std::abs(p.value - m.value) <= tol * std::max(1.0, std::abs(p.value)))
    return Multiplicity::One;
  return Multiplicity::Outside;
}

inline Multiplicity multiplicity_classify(const JacobiCoefficients& c, double lambda, long n0 = 0,
                                          const Ladder& ladder = default_line_ladder()) {
  auto bp = boundary_value_line([&](cplx z) { return M_pm(c, Side::Plus, n0, z); }, lambda, ladder);
  auto bm = boundary_value_line([&](cplx z) { return M_pm(c, Side::Minus, n0, z); }, lambda, ladder);
  return multiplicity_from(bp, bm);
}

// ---------------------------------------------------------------------------
// Periodic bands and dense truncations

// Bands {λ : |Δ(λ)| <= 2} of the periodic operator, from the eigenvalues of
// the periodic and antiperiodic Floquet matrices.
inline FiniteGapSet periodic_bands(const JacobiTail& t, double merge_tol = 1e-12) {
  const std::size_t p = t.period();
  std::vector<double> ev;
  for (double phase : {1.0, -1.0}) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t j = 0; j < p; ++j) h(j, j) = t.b[j];
    for (std::size_t j = 0; j + 1 < p; ++j) h(j, j + 1) = h(j + 1, j) = t.a[j];
    h(p - 1, 0) += phase * t.a[p - 1];
    h(0, p - 1) = h(p - 1, 0);
    if (p == 1) h(0, 0) = t.b[0] + 2.0 * phase * t.a[0];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    for (int i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()(i));
  }
  std::sort(ev.begin(), ev.end());
  std::vector<Interval> bands;
  for (std::size_t i = 0; i + 1 < ev.size(); i += 2) {
    if (!bands.empty() && ev[i] - bands.back().hi <= merge_tol * std::max(1.0, std::abs(ev[i])))
      bands.back().hi = ev[i + 1];
    else
      bands.push_back({ev[i], ev[i + 1]});
  }
  return FiniteGapSet::from_bands(bands);
}

// Dense Dirichlet truncation of H to indices [lo, hi].
inline Eigen::MatrixXd jacobi_window(const JacobiCoefficients& c, long lo, long hi) {
  const long n = hi - lo + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    h(i, i) = c.b(lo + i);
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = c.a(lo + i);
  }
  return h;
}

struct Eigenvalue {
  double value = 0.0;
  double interior_weight = 0.0;  // share of the eigenvector on the middle half
};

// Eigenvalues of truncations that sit off E, persist when the window
// doubles, and belong to vectors living away from the cut ends. Edge states
// produced by the cuts fail the last test.
inline std::vector<Eigenvalue> discrete_spectrum(const Eigen::MatrixXd& small, const Eigen::MatrixXd& large,
                                                 const std::function<bool(double)>& off_set, double stable_tol = 1e-8,
                                                 double interior_share = 0.9) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(small, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_l(large);
  const long n = large.rows();
  std::vector<Eigenvalue> out;
  for (long i = 0; i < n; ++i) {
    const double v = es_l.eigenvalues()(i);
    if (!off_set(v)) continue;
    double best = inf;
    for (long j = 0; j < small.rows(); ++j) best = std::min(best, std::abs(es_s.eigenvalues()(j) - v));
    if (best > stable_tol * std::max(1.0, std::abs(v))) continue;
    const auto vec = es_l.eigenvectors().col(i);
    const double mid = vec.segment(n / 4, n / 2).squaredNorm() / vec.squaredNorm();
    if (mid < interior_share) continue;
    out.push_back({v, mid});
  }
  return out;
}

inline std::vector<Eigenvalue> jacobi_discrete_spectrum(const JacobiCoefficients& c, const FiniteGapSet& set,
                                                        long half_width = 200) {
  const long centre = (c.n_min + c.n_max()) / 2;
  auto small = jacobi_window(c, centre - half_width, centre + half_width);
  auto large = jacobi_window(c, centre - 2 * half_width, centre + 2 * half_width);
  return discrete_spectrum(small, large, [&](double x) { return !set.contains(x); });
}

}  // namespace refless
