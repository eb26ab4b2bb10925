#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "banded.hpp"
#include "boundary.hpp"
#include "common.hpp"
#include "jacobi.hpp"
#include "sets.hpp"

namespace refless {

// Verblunsky coefficients: explicit core on [n_min, n_min+len) and periodic
// tails anchored to the absolute index, alpha(n) = tail[n mod p].
struct VerblunskyTail {
  std::vector<cplx> alpha{cplx{}};

  static VerblunskyTail free() { return {}; }
  static VerblunskyTail periodic(std::vector<cplx> a) { return {std::move(a)}; }
  std::size_t period() const { return alpha.size(); }
  cplx at(long n) const { return alpha[JacobiTail::slot(n, period())]; }
  bool operator==(const VerblunskyTail&) const = default;
};

struct VerblunskyCoefficients {
  long n_min = 0;
  std::vector<cplx> core;
  VerblunskyTail left, right;

  static VerblunskyCoefficients free() { return {}; }
  static VerblunskyCoefficients periodic(std::vector<cplx> a) {
    VerblunskyCoefficients c;
    c.left = c.right = VerblunskyTail::periodic(std::move(a));
    c.validate();
    return c;
  }

  long n_max() const { return n_min + static_cast<long>(core.size()) - 1; }
  cplx alpha(long n) const {
    if (n >= n_min && n <= n_max()) return core[static_cast<std::size_t>(n - n_min)];
    return n < n_min ? left.at(n) : right.at(n);
  }
  double rho(long n) const { return std::sqrt(std::max(0.0, 1.0 - std::norm(alpha(n)))); }

  void validate() const {
    auto check = [](cplx a) {
      if (!(std::abs(a) < 1.0)) throw InvalidInput("Verblunsky coefficients must lie in the open disk");
    };
    for (auto a : core) check(a);
    for (const auto* t : {&left, &right}) {
      if (t->alpha.empty()) throw InvalidInput("empty Verblunsky tail");
      for (auto a : t->alpha) check(a);
    }
  }
  bool operator==(const VerblunskyCoefficients&) const = default;
};

using AlphaFn = std::function<cplx(long)>;

namespace detail {

// Nonzero entries of row n of U: columns n-2..n+2, as (column, value).
template <class Put>
void cmv_row(const AlphaFn& alpha, long n, Put put) {
  auto rho = [&](long k) { return std::sqrt(std::max(0.0, 1.0 - std::norm(alpha(k)))); };
  if (n % 2 == 0) {
    put(n - 2, rho(n - 1) * rho(n));
    put(n - 1, std::conj(alpha(n - 1)) * rho(n));
    put(n + 1, std::conj(alpha(n)) * rho(n + 1));
  } else {
    put(n - 1, -alpha(n + 1) * rho(n));
    put(n + 1, -alpha(n + 2) * rho(n + 1));
    put(n + 2, rho(n + 1) * rho(n + 2));
  }
  put(n, -std::conj(alpha(n)) * alpha(n + 1));
}

// Coefficients with unimodular values forced at `lo` and `hi_plus`, which
// splits U so that indices [lo, hi_plus-1] form an invariant block.
inline AlphaFn split_alpha(const VerblunskyCoefficients& c, long lo, long hi_plus, cplx phase_lo = 1.0,
                           cplx phase_hi = 1.0) {
  return [&c, lo, hi_plus, phase_lo, phase_hi](long n) {
    if (n == lo) return phase_lo;
    if (n == hi_plus) return phase_hi;
    return c.alpha(n);
  };
}

// ((U+z)(U-z)^{-1})(k,k) = 1 + 2z ((U-z)^{-1})(k,k) on the block [lo, hi].
inline cplx cayley_diag_window(const AlphaFn& alpha, long lo, long hi, long k, cplx z) {
  const long n = hi - lo + 1;
  BandMatrix a(n, 2, 2);
  for (long r = lo; r <= hi; ++r)
    cmv_row(alpha, r, [&](long col, cplx v) {
      if (col >= lo && col <= hi) a.add(r - lo, col - lo, v);
    });
  for (long i = 0; i < n; ++i) a.add(i, i, -z);
  std::vector<cplx> e(n, 0.0);
  e[k - lo] = 1.0;
  const auto x = a.solve(std::move(e));
  return 1.0 + 2.0 * z * x[k - lo];
}

// Schur step f -> (β + z f)/(1 + conj(β) z f) as a Möbius matrix.
inline Mob schur_step(cplx beta, cplx z) { return {z, beta, std::conj(beta) * z, 1.0}; }

// Fixed point of a periodic Schur tail: the root inside the disk.
inline cplx schur_fixed_point(const Mob& t) {
  if (std::abs(t.C) == 0.0) {
    if (t.D - t.A == 0.0) return 0.0;
    return t.B / (t.D - t.A);
  }
  const cplx disc = std::sqrt((t.D - t.A) * (t.D - t.A) + 4.0 * t.B * t.C);
  const cplx r1 = (t.A - t.D + disc) / (2.0 * t.C);
  const cplx r2 = (t.A - t.D - disc) / (2.0 * t.C);
  return std::abs(r1) < std::abs(r2) ? r1 : r2;
}

inline std::size_t even_period(std::size_t p) { return p % 2 ? 2 * p : p; }

}  // namespace detail

// Dense window of U on [n_min, n_max] with unimodular values forced at n_min
// and n_max + 1, so the block is unitary.
inline Eigen::MatrixXcd build_cmv(const VerblunskyCoefficients& c, long n_min, long n_max, cplx phase_lo = 1.0,
                                  cplx phase_hi = 1.0) {
  if (n_max - n_min + 1 < 4) throw InvalidInput("CMV window needs at least four sites");
  if (std::abs(std::abs(phase_lo) - 1.0) > 1e-14 || std::abs(std::abs(phase_hi) - 1.0) > 1e-14)
    throw InvalidInput("boundary phases must be unimodular");
  const auto alpha = detail::split_alpha(c, n_min, n_max + 1, phase_lo, phase_hi);
  const long n = n_max - n_min + 1;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
  for (long r = n_min; r <= n_max; ++r)
    detail::cmv_row(alpha, r, [&](long col, cplx v) {
      if (col >= n_min && col <= n_max) u(r - n_min, col - n_min) += v;
    });
  return u;
}

// m_+(z,n0) on [n0, ∞) uses Schur parameters β_j = -conj(α(n0+1+j));
// m_-(z,k) on (-∞, k] uses β_j = -α(k-j). Then m = (1 + z f)/(1 - z f).
inline cplx m_cmv(const VerblunskyCoefficients& c, Side side, long n0, cplx z) {
  const double r = std::abs(z);
  if (r == 1.0) throw InvalidInput("|z| = 1; use a radial ladder");
  if (r > 1.0) return -std::conj(m_cmv(c, side, n0, 1.0 / std::conj(z)));
  if (z == 0.0) return 1.0;
  cplx f;
  if (side == Side::Plus) {
    auto beta = [&](long j) { return -std::conj(c.alpha(n0 + 1 + j)); };
    const long j0 = std::max(0L, c.n_max() + 1 - (n0 + 1));
    const long p = static_cast<long>(c.right.period());
    detail::Mob t;
    for (long j = j0 + p - 1; j >= j0; --j) t = detail::schur_step(beta(j), z).after(t);
    f = detail::schur_fixed_point(t);
    for (long j = j0 - 1; j >= 0; --j) f = detail::schur_step(beta(j), z).apply(f);
  } else {
    auto beta = [&](long j) { return -c.alpha(n0 - j); };
    const long j0 = std::max(0L, n0 - (c.n_min - 1));
    const long p = static_cast<long>(c.left.period());
    detail::Mob t;
    for (long j = j0 + p - 1; j >= j0; --j) t = detail::schur_step(beta(j), z).after(t);
    f = detail::schur_fixed_point(t);
    for (long j = j0 - 1; j >= 0; --j) f = detail::schur_step(beta(j), z).apply(f);
  }
  return (1.0 + z * f) / (1.0 - z * f);
}

// Truncation length so that |z|^{N/2} falls below tol, plus the core.
inline long cmv_truncation(const VerblunskyCoefficients& c, cplx z, double tol = 1e-14) {
  const double r = std::max(std::abs(z), 1e-3);
  const long base = static_cast<long>(std::ceil(2.0 * std::log(tol) / std::log(r)));
  return std::min(4096L, base + static_cast<long>(c.core.size()) + 8);
}

// Same m-function from a truncated half-lattice block with a unimodular
// coefficient at the far end.
inline cplx m_cmv_truncated(const VerblunskyCoefficients& c, Side side, long n0, cplx z, double tol = 1e-14) {
  if (!(std::abs(z) < 1.0)) throw InvalidInput("truncated m-function needs |z| < 1");
  const long w = cmv_truncation(c, z, tol);
  if (side == Side::Plus) return detail::cayley_diag_window(detail::split_alpha(c, n0, n0 + w), n0, n0 + w - 1, n0, z);
  return detail::cayley_diag_window(detail::split_alpha(c, n0 - w + 1, n0 + 1), n0 - w + 1, n0, n0, z);
}

// M_+ = m_+(z,n0); M_- is the Möbius image of -m_-(z,n0-1) under
// (Re(1+α) + i Im(1-α) w)/(i Im(1+α) + Re(1-α) w), α = α(n0). The sign on
// m_- makes -M_- Caratheodory and reproduces the direct M_{1,1}.
inline cplx M_pm_cmv(const VerblunskyCoefficients& c, Side side, long n0, cplx z) {
  if (side == Side::Plus) return m_cmv(c, Side::Plus, n0, z);
  const cplx a = c.alpha(n0);
  const cplx w = -m_cmv(c, Side::Minus, n0 - 1, z);
  const cplx num = (1.0 + a).real() + I * (1.0 - a).imag() * w;
  const cplx den = I * (1.0 + a).imag() + (1.0 - a).real() * w;
  if (den == 0.0) throw PoleError("M_- has a pole");
  return num / den;
}

inline cplx M11_cmv(const VerblunskyCoefficients& c, long n0, cplx z) {
  const cplx mp = M_pm_cmv(c, Side::Plus, n0, z), mm = M_pm_cmv(c, Side::Minus, n0, z);
  if (mp == mm) throw PoleError("M_+ = M_-");
  return (1.0 - mp * mm) / (mp - mm);
}

// ((U+z)(U-z)^{-1})(n0,n0) from a two-sided truncation, |z| < 1.
inline cplx M11_cmv_direct(const VerblunskyCoefficients& c, long n0, cplx z, double tol = 1e-14) {
  if (!(std::abs(z) < 1.0)) throw InvalidInput("direct M11 needs |z| < 1");
  const long w = cmv_truncation(c, z, tol) + std::abs(n0 - c.n_min);
  return detail::cayley_diag_window(detail::split_alpha(c, n0 - w, n0 + w), n0 - w, n0 + w - 1, n0, z);
}

// Composed value, cross-checked against the truncation; a mismatch means
// the half-lattice conventions are inconsistent.
inline cplx M11_cmv_checked(const VerblunskyCoefficients& c, long n0, cplx z, double tol = 1e-5) {
  const cplx a = M11_cmv(c, n0, z), b = M11_cmv_direct(c, n0, z);
  if (std::abs(a - b) > tol * std::max(1.0, std::abs(b))) throw ConventionFault("M11 paths disagree");
  return a;
}

// Ξ_{1,1}(ζ,n) = (1/π) Arg M_{1,1}(ζ,n), argument pinned to [-π/2, π/2].
inline XiValue xi_cmv(const VerblunskyCoefficients& c, long n, double theta,
                      const Ladder& ladder = default_circle_ladder()) {
  XiValue x;
  const cplx zeta = std::polar(1.0, theta);
  BoundaryOptions opt;
  x.bv = limit_along([&](double e) {
    const cplx v = M11_cmv(c, n, (1.0 - e) * zeta);
    return cplx(std::atan2(v.imag(), std::max(v.real(), 0.0)) / pi, 0.0);
  }, ladder, opt);
  x.decided = x.bv.converged && !x.bv.infinite;
  const double v = x.bv.value.real();
  if (std::abs(v) > 0.5 + 1e-6) x.decided = false;
  x.value = std::clamp(v, -0.5, 0.5);
  return x;
}

// Interior angular grid over the kept arcs (full circle: uniform).
inline std::vector<double> arc_grid(const ArcSet& set, int count, double margin = 1e-3) {
  std::vector<double> out;
  if (set.is_full()) {
    for (int j = 0; j < count; ++j) out.push_back(2.0 * pi * (j + 0.5) / count);
    return out;
  }
  const auto kept = set.kept();
  const double total = set.measure();
  int left = count;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& k = kept[i];
    int m = i + 1 == kept.size() ? left : static_cast<int>(std::lround(count * k.length() / total));
    m = std::clamp(m, 0, left);
    left -= m;
    const double lo = k.lo + margin * k.length(), hi = k.hi - margin * k.length();
    for (int j = 0; j < m; ++j) out.push_back(m == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (m - 1.0));
  }
  return out;
}

// sup and mean of |M_+(ζ) + conj(M_-(ζ))| over grid angles on E.
inline Defect reflectionless_defect_cmv(const VerblunskyCoefficients& c, long n0, const ArcSet& set,
                                        const std::vector<double>& grid,
                                        const Ladder& ladder = default_circle_ladder()) {
  return detail::aggregate_defect(grid, [&](double t) { return set.contains(t); }, [&](double t) {
    auto bp = boundary_value_circle([&](cplx z) { return M_pm_cmv(c, Side::Plus, n0, z); }, t, ladder);
    auto bm = boundary_value_circle([&](cplx z) { return M_pm_cmv(c, Side::Minus, n0, z); }, t, ladder);
    const bool ok = bp.converged && bm.converged && !bp.infinite && !bm.infinite;
    const double v = ok ? std::abs(bp.value + std::conj(bm.value)) : inf;
    return std::pair{v, ok};
  });
}

struct MatrixCaratheodory {
  cplx m00, m01, m10, m11, trace;
};

// The 2x2 Caratheodory matrix built from M_±(z,n0).
inline MatrixCaratheodory matrix_caratheodory(const VerblunskyCoefficients& c, long n0, cplx z) {
  const cplx mp = M_pm_cmv(c, Side::Plus, n0, z), mm = M_pm_cmv(c, Side::Minus, n0, z);
  const cplx d = mp - mm;
  if (d == 0.0) throw PoleError("M_+ = M_-");
  MatrixCaratheodory m;
  m.m00 = 1.0 / d;
  m.m01 = 0.5 * (mp + mm) / d;
  m.m10 = -m.m01;
  m.m11 = -mp * mm / d;
  m.trace = (1.0 - mp * mm) / d;
  return m;
}

struct DensityMatrix {
  Eigen::Matrix2cd value = Eigen::Matrix2cd::Zero();
  int rank = 0;
  bool converged = false;
};

// Radon-Nikodym matrix of the 2x2 measure against its trace at e^{iθ}.
inline DensityMatrix density_matrix_cmv(const VerblunskyCoefficients& c, long n0, double theta,
                                        const Ladder& ladder = default_circle_ladder(), double rank_tol = 1e-6) {
  const cplx zeta = std::polar(1.0, theta);
  auto entry = [&](int which) {
    return limit_along([&, which](double e) {
      const auto m = matrix_caratheodory(c, n0, (1.0 - e) * zeta);
      const double tr = (m.m00 + m.m11).real();
      switch (which) {
        case 0: return cplx(m.m00.real() / tr);
        case 1: return I * m.m01.imag() / tr;
        case 2: return I * m.m10.imag() / tr;
        default: return cplx(m.m11.real() / tr);
      }
    }, ladder);
  };
  DensityMatrix d;
  d.converged = true;
  for (int k = 0; k < 4; ++k) {
    auto bv = entry(k);
    d.converged = d.converged && bv.converged && !bv.infinite;
    d.value(k / 2, k % 2) = bv.value;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (d.value + d.value.adjoint()), Eigen::EigenvaluesOnly);
  for (int k = 0; k < 2; ++k)
    if (es.eigenvalues()(k) > rank_tol) ++d.rank;
  return d;
}

// Multiplicity on the circle: the line rule applied to -i M_±, since the
// circle criteria ask for values off the imaginary axis.
inline Multiplicity multiplicity_classify_cmv(const VerblunskyCoefficients& c, double theta, long n0 = 0,
                                              const Ladder& ladder = default_circle_ladder()) {
  auto bp = boundary_value_circle([&](cplx z) { return -I * M_pm_cmv(c, Side::Plus, n0, z); }, theta, ladder);
  auto bm = boundary_value_circle([&](cplx z) { return -I * M_pm_cmv(c, Side::Minus, n0, z); }, theta, ladder);
  return multiplicity_from(bp, bm);
}

// ---------------------------------------------------------------------------
// Periodic arcs and truncations

// Discriminant z^{-p/2} tr(T_{p-1} ... T_0) of the Szegő transfer matrices,
// real on the circle for even p.
inline double cmv_discriminant(const VerblunskyTail& t, double theta) {
  const std::size_t p = detail::even_period(t.period());
  const cplx z = std::polar(1.0, theta);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  for (std::size_t k = 0; k < p; ++k) {
    const cplx a = t.at(static_cast<long>(k));
    const double r = std::sqrt(1.0 - std::norm(a));
    Eigen::Matrix2cd s;
    s << z, -std::conj(a), -a * z, 1.0;
    m = (s / r) * m;
  }
  return (m.trace() * std::polar(1.0, -0.5 * theta * static_cast<double>(p))).real();
}

// Kept arcs {θ : |Δ(θ)| <= 2}. Closed gaps merge.
inline ArcSet periodic_arcs(const VerblunskyTail& t, int samples = 4096) {
  auto f = [&](double th) { return std::abs(cmv_discriminant(t, th)) - 2.0; };
  // Start the sweep in a gap when there is one, so arcs never wrap.
  double start = 0.0, worst = -inf;
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * pi * i / samples;
    const double v = f(th);
    if (v > worst) {
      worst = v;
      start = th;
    }
  }
  if (worst <= 1e-12) return ArcSet::full_circle();
  std::vector<double> edges;
  double prev = f(start);
  for (int i = 1; i <= samples; ++i) {
    const double th = start + 2.0 * pi * i / samples;
    const double v = f(th);
    if ((prev > 0.0) != (v > 0.0)) {
      double lo = th - 2.0 * pi / samples, hi = th;
      const bool lo_pos = prev > 0.0;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (lo + hi);
        if ((f(m) > 0.0) == lo_pos)
          lo = m;
        else
          hi = m;
      }
      edges.push_back(0.5 * (lo + hi));
    }
    prev = v;
  }
  std::vector<Arc> kept;
  for (std::size_t i = 0; i + 1 < edges.size(); i += 2) {
    // A "gap" on which |Δ| only grazes 2 is a closed gap.
    if (!kept.empty() && f(0.5 * (kept.back().hi + edges[i])) <= 1e-9)
      kept.back().hi = edges[i + 1];
    else
      kept.push_back({edges[i], edges[i + 1]});
  }
  if (kept.size() > 1 && f(0.5 * (kept.back().hi + kept.front().lo + 2.0 * pi)) <= 1e-9) {
    kept.front().lo = kept.back().lo;
    kept.pop_back();
    if (kept.front().hi - kept.front().lo >= 2.0 * pi) return ArcSet::full_circle();
  }
  return ArcSet::from_kept(kept);
}

inline std::vector<Eigenvalue> cmv_discrete_spectrum(const VerblunskyCoefficients& c, const ArcSet& set,
                                                     long half_width = 100, double stable_tol = 1e-8,
                                                     double interior_share = 0.9) {
  const long centre = 2 * ((c.n_min + c.n_max()) / 4);
  auto small = build_cmv(c, centre - half_width, centre + half_width - 1);
  auto large = build_cmv(c, centre - 2 * half_width, centre + 2 * half_width - 1);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es_s(small, false), es_l(large, true);
  std::vector<Eigenvalue> out;
  const long n = large.rows();
  for (long i = 0; i < n; ++i) {
    const double th = wrap_angle(std::arg(es_l.eigenvalues()(i)));
    if (set.contains(th)) continue;
    double best = inf;
    for (long j = 0; j < small.rows(); ++j)
      best = std::min(best, std::abs(es_s.eigenvalues()(j) - es_l.eigenvalues()(i)));
    if (best > stable_tol) continue;
    const auto vec = es_l.eigenvectors().col(i);
    const double mid = vec.segment(n / 4, n / 2).squaredNorm() / vec.squaredNorm();
    if (mid < interior_share) continue;
    out.push_back({th, mid});
  }
  return out;
}

}  // namespace refless
