#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "cmv.hpp"
#include "common.hpp"
#include "herglotz.hpp"
#include "jacobi.hpp"
#include "measure.hpp"
#include "potential.hpp"
#include "quadrature.hpp"
#include "schrodinger.hpp"
#include "sets.hpp"

namespace refless {

struct Thresholds {
  double defect = 1e-4;  // reflectionless sup-defect
  double xi = 1e-4;      // sup |ξ - 1/2| (line) or sup |Ξ| (circle)
  double atom = 1e-6;    // atom mass indicator on E
  double mass = 1e-6;    // mass-balance residual

  // REFLESS_DEFECT_TOL, REFLESS_XI_TOL, REFLESS_ATOM_TOL and
  // REFLESS_MASS_TOL override the matching field when set.
  Thresholds with_env() const {
    Thresholds t = *this;
    auto read = [](const char* name, double& slot) {
      if (const char* v = std::getenv(name)) {
        char* end = nullptr;
        const double x = std::strtod(v, &end);
        if (end == v || *end != '\0' || !(x > 0.0)) throw InvalidInput(std::string("bad value for ") + name);
        slot = x;
      }
    };
    read("REFLESS_DEFECT_TOL", t.defect);
    read("REFLESS_XI_TOL", t.xi);
    read("REFLESS_ATOM_TOL", t.atom);
    read("REFLESS_MASS_TOL", t.mass);
    return t;
  }
};

enum class Verdict { Pass, Fail, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    default: return "INCONCLUSIVE";
  }
}

enum class StageStatus { Pass, Fail, Undecided, Skipped };

inline std::string to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Pass: return "PASS";
    case StageStatus::Fail: return "FAIL";
    case StageStatus::Skipped: return "SKIPPED";
    default: return "UNDECIDED";
  }
}

struct Stage {
  std::string name;
  StageStatus status = StageStatus::Undecided;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct DensityRow {
  double x = 0.0;
  double density = 0.0;
  bool converged = false;
};

struct AtomHit {
  double position = 0.0;
  double mass = 0.0;
};

struct LedgerEntry {
  double position = 0.0;  // energy on the line, angle on the circle
  double weight = 0.0;    // mass of the examined measure at that point
  bool near = false;      // inside O (Blaschke term) or beyond it (far part)
};

struct FarPart {
  double sup = 0.0;        // sup of the far part's real (line) or imaginary (circle) boundary values on E
  double bound = 0.0;      // a priori bound from mass and distance
  double distance = inf;   // distance from E to the far support
  double mass = 0.0;
};

struct MeasureSplit {
  HerglotzFunction r1, r2;
};

struct PurityReport {
  std::string operator_kind;
  std::string set_description;
  Thresholds thresholds;
  double defect_sup = 0.0, defect_mean = 0.0;
  double xi_deviation = 0.0;
  double homogeneity = 0.0;
  std::optional<BlaschkeResult> blaschke;
  FarPart far;
  std::vector<LedgerEntry> ledger;
  std::vector<DensityRow> ac_density;
  std::vector<AtomHit> atoms;
  double total_mass = 0.0;
  double mass_residual = 0.0;
  std::vector<Stage> stages;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;

  const Stage* stage(const std::string& name) const {
    for (const auto& s : stages)
      if (s.name == name) return &s;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Measure splitting and the far part

namespace detail {

inline bool in_open(const std::vector<Interval>& open, double x) {
  for (const auto& o : open)
    if (x > o.lo && x < o.hi) return true;
  return false;
}

inline double distance_to_boundary(const std::vector<Interval>& open, double x) {
  double d = inf;
  for (const auto& o : open) d = std::min({d, std::abs(x - o.lo), std::abs(x - o.hi)});
  return d;
}

}  // namespace detail

// Route atoms and AC pieces by membership in O: r1 keeps what lies in O,
// r2 the rest together with the constant and linear terms, so r = r1 + r2.
inline MeasureSplit split_measure(const HerglotzFunction& m, const std::vector<Interval>& O, const FiniteGapSet& E,
                                  double tol = 1e-10) {
  for (const auto& b : E.bands())
    if (std::none_of(O.begin(), O.end(), [&](const Interval& o) { return o.lo < b.lo && b.hi < o.hi; }))
      throw InvalidInput("E must lie inside O");
  const auto& mu = m.measure();
  SpectralMeasure near{Space::Line, {}, {}, true}, far{Space::Line, {}, {}, true};
  for (const auto& a : mu.atoms) {
    if (detail::distance_to_boundary(O, a.position) <= tol) throw InvalidInput("atom on the boundary of O");
    (detail::in_open(O, a.position) ? near : far).atoms.push_back(a);
  }
  for (const auto& p : mu.ac) {
    const double mid = 0.5 * (p.lo + p.hi);
    bool inside = false;
    for (const auto& o : O) inside = inside || (p.lo > o.lo + tol && p.hi < o.hi - tol);
    bool outside = true;
    for (const auto& o : O) outside = outside && (p.hi < o.lo - tol || p.lo > o.hi + tol);
    if (!inside && !outside) throw InvalidInput("AC piece straddles the boundary of O");
    (detail::in_open(O, mid) ? near : far).ac.push_back(p);
  }
  return {HerglotzFunction(0.0, 0.0, std::move(near), m.kernel()),
          HerglotzFunction(m.c(), m.slope(), std::move(far), m.kernel())};
}

// sup |Re r2| on the grid points of E, with the bound |c| + mass/dist (plus
// mass/2 for the Nevanlinna normalization term).
inline FarPart far_part_bounded(const HerglotzFunction& r2, const FiniteGapSet& E, const std::vector<double>& grid) {
  FarPart f;
  const auto& mu = r2.measure();
  f.mass = mu.total_mass();
  for (const auto& a : mu.atoms) f.distance = std::min(f.distance, E.distance(a.position));
  for (const auto& p : mu.ac)
    for (const auto& b : E.bands()) {
      const double gap = std::max({0.0, p.lo - b.hi, b.lo - p.hi});
      f.distance = std::min(f.distance, gap);
    }
  if (mu.empty()) f.distance = inf;
  if (!(f.distance > 0.0)) throw InvalidInput("far part touches E");
  if (r2.slope() != 0.0 && E.unbounded) throw InvalidInput("linear far part is unbounded on E");
  double top = 0.0;
  for (const auto& b : E.bands()) top = std::max({top, std::abs(b.lo), std::abs(b.hi)});
  f.bound = std::abs(r2.c()) + r2.slope() * top + (mu.empty() ? 0.0 : f.mass / f.distance) +
            (r2.kernel() == Kernel::Nevanlinna ? 0.5 * f.mass : 0.0);
  for (double x : grid)
    if (E.contains(x)) f.sup = std::max(f.sup, std::abs(r2.eval(cplx(x, 0.0)).real()));
  return f;
}

// ---------------------------------------------------------------------------
// Boundary-value stages over a set of pieces on the line or the circle

// The function whose measure is examined: Herglotz on the line (density
// Im f/π), Caratheodory on the circle (density Re f/(2π) against dθ).
struct SpectralView {
  Space space = Space::Line;
  AnalyticFn f;
  std::vector<Interval> pieces;  // bands, or kept arcs as angle intervals
  Ladder ladder = default_line_ladder();

  cplx at(double x, double e) const {
    return space == Space::Line ? f(cplx(x, e)) : f((1.0 - e) * std::polar(1.0, x));
  }
  double density_of(cplx v) const { return space == Space::Line ? v.imag() / pi : v.real() / (2.0 * pi); }
  // Poisson-smoothed mass near x at scale e; tends to the atom weight at x.
  double poisson(double x, double e) const {
    const cplx v = at(x, e);
    return space == Space::Line ? e * v.imag() : 0.5 * e * v.real();
  }
  bool on_set(double x) const {
    for (const auto& p : pieces) {
      if (space == Space::Line ? p.contains(x) : wrap_angle(x - p.lo) <= p.hi - p.lo) return true;
    }
    return false;
  }
  double scale() const {
    if (space == Space::Circle) return 2.0 * pi;
    double s = 1.0;
    for (const auto& p : pieces) s = std::max({s, std::abs(p.lo), std::abs(p.hi)});
    return s;
  }
};

inline SpectralView line_view(AnalyticFn f, const FiniteGapSet& E, Ladder ladder = default_line_ladder()) {
  if (E.unbounded) throw InvalidInput("line view needs a bounded set");
  return {Space::Line, std::move(f), E.bands(), std::move(ladder)};
}

inline SpectralView circle_view(AnalyticFn f, const ArcSet& E, Ladder ladder = default_circle_ladder()) {
  std::vector<Interval> pieces;
  for (const auto& k : E.kept()) pieces.push_back({k.lo, k.hi});
  return {Space::Circle, std::move(f), std::move(pieces), std::move(ladder)};
}

inline DensityRow density_at(const SpectralView& v, double x) {
  BoundaryOptions opt;
  opt.tol = 1e-7;
  auto bv = limit_along([&](double e) { return cplx(v.density_of(v.at(x, e)), 0.0); }, v.ladder, opt);
  return {x, bv.infinite ? inf : bv.value.real(), bv.converged && !bv.infinite};
}

// Density table on the grid points that lie on the set. A density below
// -1e-8 cannot come from a positive measure and raises NumericalFault.
inline std::vector<DensityRow> ac_density_extract(const SpectralView& v, const std::vector<double>& grid) {
  std::vector<DensityRow> rows;
  for (double x : grid) {
    if (!v.on_set(x)) continue;
    auto r = density_at(v, x);
    if (r.converged && r.density < -1e-8) throw NumericalFault("negative spectral density");
    rows.push_back(r);
  }
  return rows;
}

// Atoms on the set. From every grid point the peak of the Poisson-smoothed
// mass is tracked while the smoothing scale shrinks, so an atom anywhere
// within half a grid step is found. The mass is read at two tiny scales:
// an atom gives the same value twice, an edge blow-up of the density gives
// a value that keeps shrinking and is reported as zero.
inline std::vector<AtomHit> atom_scan(const SpectralView& v, const std::vector<double>& grid, double threshold = 1e-6) {
  std::vector<AtomHit> hits;
  const double scale = v.scale();
  std::vector<double> pts;
  for (double x : grid)
    if (v.on_set(x)) pts.push_back(x);
  if (pts.empty()) return hits;
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double h = 0.0;
    if (i > 0) h = std::max(h, pts[i] - pts[i - 1]);
    if (i + 1 < pts.size()) h = std::max(h, pts[i + 1] - pts[i]);
    if (h == 0.0) h = 1e-2 * scale;
    double x = pts[i];
    for (double e = h; e > 1e-12 * scale; e *= 0.25) {
      double best = x, best_val = -inf;
      for (int j = -4; j <= 4; ++j) {
        const double y = x + 0.25 * e * j;
        const double val = v.poisson(y, e);
        if (val > best_val) {
          best_val = val;
          best = y;
        }
      }
      x = best;
    }
    if (!v.on_set(x)) continue;
    const double e1 = 1e-9 * scale, e2 = e1 / 16.0;
    const double w1 = v.poisson(x, e1), w2 = v.poisson(x, e2);
    const double mass = w2 >= 0.9 * w1 ? std::min(w1, w2) : 0.0;
    if (!(mass > threshold)) continue;
    const bool seen = std::any_of(hits.begin(), hits.end(),
                                  [&](const AtomHit& a) { return std::abs(a.position - x) < 1e-8 * scale; });
    if (!seen) hits.push_back({x, mass});
  }
  return hits;
}

// |μ(R) - Σ atoms - ∫_E density|, the integral per piece through the
// cosine substitution so edge blow-ups of inverse-square-root type stay
// integrable without a cut-off margin.
inline double mass_balance_residual(const SpectralView& v, double total, double atom_mass,
                                    QuadOptions opt = {1e-10, 1e-9, 2000}) {
  double integral = 0.0;
  for (const auto& p : v.pieces) {
    auto q = integrate_band([&](double x) { return density_at(v, x).density; }, p.lo, p.hi, opt);
    integral += q.value;
  }
  return std::abs(total - atom_mass - integral);
}

// Mass balance for an explicitly known measure: atoms off E are counted,
// everything on E must come back through the boundary values.
inline double mass_balance_check(const HerglotzFunction& m, const FiniteGapSet& E) {
  double atoms = 0.0;
  for (const auto& a : m.measure().atoms)
    if (!E.contains(a.position)) atoms += a.weight;
  return mass_balance_residual(line_view(m.as_function(), E), m.measure().total_mass(), atoms);
}

inline std::vector<AtomHit> atom_scan(const HerglotzFunction& m, const FiniteGapSet& E, const std::vector<double>& grid,
                                      double threshold = 1e-6) {
  return atom_scan(line_view(m.as_function(), E), grid, threshold);
}

inline std::vector<DensityRow> ac_density_extract(const HerglotzFunction& m, const FiniteGapSet& E,
                                                  const std::vector<double>& grid,
                                                  const Ladder& ladder = default_line_ladder()) {
  return ac_density_extract(line_view(m.as_function(), E, ladder), grid);
}

// ---------------------------------------------------------------------------
// Certification

struct CertifyOptions {
  long n0 = 0;           // lattice site (Jacobi, CMV)
  double x0 = 0.0;       // base point (Schrödinger)
  int grid_count = 101;
  double margin = 1e-3;  // relative band-edge margin for grids
  double cap = 100.0;    // upper cut of unbounded sets for grid work
  long window = 200;     // half-width of the truncation windows for the eigen ledger
};

inline std::string describe(const FiniteGapSet& E) {
  std::ostringstream os;
  os.precision(17);
  const auto bands = E.bands();
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (i) os << " U ";
    const bool open_end = E.unbounded && i + 1 == bands.size();
    os << '[' << bands[i].lo << ", " << (open_end ? std::string("inf)") : "");
    if (!open_end) os << bands[i].hi << ']';
  }
  return os.str();
}

inline std::string describe(const ArcSet& E) {
  if (E.is_full()) return "full circle";
  std::ostringstream os;
  os.precision(17);
  const auto kept = E.kept();
  for (std::size_t i = 0; i < kept.size(); ++i) os << (i ? " U " : "") << "arc[" << kept[i].lo << ", " << kept[i].hi << ']';
  return os.str();
}

// Default neighbourhood O of a line set: every band widened by `pad`, capped
// at a quarter of the narrowest gap so the bands stay separated.
inline std::vector<Interval> default_neighbourhood(const FiniteGapSet& E, double pad = 0.5) {
  for (const auto& g : E.gaps) pad = std::min(pad, 0.25 * g.length());
  std::vector<Interval> out;
  const auto bands = E.bands();
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const bool open_end = E.unbounded && i + 1 == bands.size();
    out.push_back({bands[i].lo - pad, open_end ? inf : bands[i].hi + pad});
  }
  return out;
}

inline std::vector<Arc> default_neighbourhood(const ArcSet& E, double pad = 0.25) {
  if (E.is_full()) return {{0.0, 2.0 * pi}};
  for (const auto& r : E.removed) pad = std::min(pad, 0.25 * r.length());
  std::vector<Arc> out;
  for (const auto& k : E.kept()) out.push_back({k.lo - pad, k.hi + pad});
  return out;
}

namespace detail {

inline bool in_arcs(const std::vector<Arc>& arcs, double t) {
  for (const auto& a : arcs) {
    const double off = wrap_angle(t - a.lo);
    if (off > 0.0 && off < a.length()) return true;
  }
  return false;
}

inline Stage stage_below(std::string name, double value, double threshold, bool decided, std::string note = {}) {
  Stage s{std::move(name), StageStatus::Undecided, value, threshold, std::move(note)};
  if (value > threshold) s.status = StageStatus::Fail;
  else if (decided) s.status = StageStatus::Pass;
  return s;
}

inline Stage defect_stage(const Defect& d, double tol) {
  std::ostringstream note;
  note << d.evaluated << " points, " << d.undecided << " undecided, " << d.skipped << " off E";
  auto s = stage_below("reflectionless", d.decided_sup, tol, d.undecided == 0 && d.evaluated > 0, note.str());
  return s;
}

inline Stage homogeneity_stage(const Homogeneity& h) {
  Stage s{"homogeneity", h.homogeneous ? StageStatus::Pass : StageStatus::Fail, h.epsilon, 0.0, {}};
  return s;
}

inline Stage blaschke_stage(const BlaschkeResult& b) {
  Stage s{"blaschke", StageStatus::Undecided, b.partial_sum, 0.0, to_string(b.classification)};
  if (b.classification == SeriesClass::Converged) s.status = StageStatus::Pass;
  if (b.classification == SeriesClass::Divergent) s.status = StageStatus::Fail;
  return s;
}

inline Stage far_stage(const FarPart& f) {
  Stage s{"far_part", f.sup <= f.bound * (1.0 + 1e-10) + 1e-14 ? StageStatus::Pass : StageStatus::Fail, f.sup, f.bound,
          "far spectrum taken from the eigen ledger; essential spectrum off E is not searched"};
  return s;
}

inline Stage density_stage(const std::vector<DensityRow>& rows) {
  double lo = inf;
  bool decided = !rows.empty();
  for (const auto& r : rows) {
    if (!r.converged) decided = false;
    else lo = std::min(lo, r.density);
  }
  Stage s{"ac_density", StageStatus::Undecided, lo, 0.0, "minimum density on the grid"};
  if (lo <= 0.0) s.status = StageStatus::Fail;
  else if (decided) s.status = StageStatus::Pass;
  return s;
}

inline Stage atom_stage(const std::vector<AtomHit>& hits, double tol) {
  double worst = 0.0;
  for (const auto& h : hits) worst = std::max(worst, h.mass);
  return {"atom_scan", hits.empty() ? StageStatus::Pass : StageStatus::Fail, worst, tol,
          std::to_string(hits.size()) + " atoms on E"};
}

// FAIL beats UNDECIDED: the first failing stage names the verdict, else the
// first undecided one, else PASS.
inline void finish(PurityReport& rep) {
  for (const auto& s : rep.stages)
    if (s.status == StageStatus::Fail) {
      rep.verdict = Verdict::Fail;
      rep.reason = s.name;
      return;
    }
  for (const auto& s : rep.stages)
    if (s.status == StageStatus::Undecided) {
      rep.verdict = Verdict::Inconclusive;
      rep.reason = s.name;
      return;
    }
  rep.verdict = Verdict::Pass;
  rep.reason.clear();
}

// Mass of a line atom at λ for a function with a simple pole there.
inline double residue_weight(const AnalyticFn& f, double lambda) {
  const double e = 1e-7 * std::max(1.0, std::abs(lambda));
  return e * f(cplx(lambda, e)).imag();
}

inline double circle_residue_weight(const AnalyticFn& f, double theta) {
  const double e = 1e-7;
  return 0.5 * e * f((1.0 - e) * std::polar(1.0, theta)).real();
}

}  // namespace detail

// Jacobi: the examined function is g(z, n0) = <δ_n0, (H-z)^{-1} δ_n0>,
// a probability measure.
inline PurityReport certify(const JacobiCoefficients& c, const FiniteGapSet& E, std::vector<Interval> O = {},
                            Thresholds th = {}, CertifyOptions opt = {}) {
  c.validate();
  E.validate();
  if (E.unbounded) throw InvalidInput("Jacobi sets are bounded");
  if (O.empty()) O = default_neighbourhood(E);
  PurityReport rep;
  rep.operator_kind = "jacobi";
  rep.set_description = describe(E);
  rep.thresholds = th;
  const auto grid = band_grid(E, opt.grid_count, opt.margin);
  const AnalyticFn g = [&c, n0 = opt.n0](cplx z) { return green_diag(c, n0, z); };

  auto d = reflectionless_defect(c, opt.n0, E, grid);
  rep.defect_sup = d.decided_sup;
  rep.defect_mean = d.mean;
  rep.stages.push_back(detail::defect_stage(d, th.defect));

  double xi_dev = 0.0;
  bool xi_ok = true;
  for (double x : grid) {
    auto xi = xi_function(c, opt.n0, x);
    xi_ok = xi_ok && xi.decided;
    if (xi.decided) xi_dev = std::max(xi_dev, std::abs(xi.value - 0.5));
  }
  rep.xi_deviation = xi_dev;
  rep.stages.push_back(detail::stage_below("xi", xi_dev, th.xi, xi_ok));

  auto h = homogeneity_epsilon(E);
  rep.homogeneity = h.epsilon;
  rep.stages.push_back(detail::homogeneity_stage(h));

  std::vector<double> near;
  SpectralMeasure far_mu{Space::Line, {}, {}, true};
  for (const auto& ev : jacobi_discrete_spectrum(c, E, opt.window)) {
    LedgerEntry le{ev.value, detail::residue_weight(g, ev.value), detail::in_open(O, ev.value)};
    rep.ledger.push_back(le);
    if (le.near) near.push_back(le.position);
    else if (le.weight > 0.0) far_mu.atoms.push_back({le.position, le.weight});
  }
  rep.blaschke = blaschke_sum(E, near);
  rep.stages.push_back(detail::blaschke_stage(*rep.blaschke));

  rep.far = far_part_bounded(HerglotzFunction(0.0, 0.0, far_mu, Kernel::Stieltjes), E, grid);
  rep.stages.push_back(detail::far_stage(rep.far));

  const auto view = line_view(g, E);
  rep.ac_density = ac_density_extract(view, grid);
  rep.stages.push_back(detail::density_stage(rep.ac_density));
  rep.atoms = atom_scan(view, grid, th.atom);
  rep.stages.push_back(detail::atom_stage(rep.atoms, th.atom));

  double atoms = 0.0;
  for (const auto& le : rep.ledger) atoms += le.weight;
  rep.total_mass = 1.0;
  rep.mass_residual = mass_balance_residual(view, rep.total_mass, atoms);
  rep.stages.push_back(detail::stage_below("mass_balance", rep.mass_residual, th.mass, true));
  detail::finish(rep);
  return rep;
}

// CMV: the examined function is the Caratheodory function M_{1,1}(z, n0).
// On the full circle the Blaschke stage is skipped.
inline PurityReport certify(const VerblunskyCoefficients& c, const ArcSet& E, std::vector<Arc> O = {},
                            Thresholds th = {}, CertifyOptions opt = {}) {
  c.validate();
  E.validate();
  if (O.empty()) O = default_neighbourhood(E);
  PurityReport rep;
  rep.operator_kind = "cmv";
  rep.set_description = describe(E);
  rep.thresholds = th;
  const auto grid = arc_grid(E, opt.grid_count, opt.margin);
  const AnalyticFn F = [&c, n0 = opt.n0](cplx z) { return M11_cmv(c, n0, z); };

  auto d = reflectionless_defect_cmv(c, opt.n0, E, grid);
  rep.defect_sup = d.decided_sup;
  rep.defect_mean = d.mean;
  rep.stages.push_back(detail::defect_stage(d, th.defect));

  double xi_dev = 0.0;
  bool xi_ok = true;
  for (double t : grid) {
    auto xi = xi_cmv(c, opt.n0, t);
    xi_ok = xi_ok && xi.decided;
    if (xi.decided) xi_dev = std::max(xi_dev, std::abs(xi.value));
  }
  rep.xi_deviation = xi_dev;
  rep.stages.push_back(detail::stage_below("xi", xi_dev, th.xi, xi_ok));

  auto h = homogeneity_epsilon(E);
  rep.homogeneity = h.epsilon;
  rep.stages.push_back(detail::homogeneity_stage(h));

  std::vector<double> near;
  std::vector<std::pair<double, double>> far;
  for (const auto& ev : cmv_discrete_spectrum(c, E, std::min(opt.window, 100L))) {
    LedgerEntry le{ev.value, detail::circle_residue_weight(F, ev.value), detail::in_arcs(O, ev.value)};
    rep.ledger.push_back(le);
    if (le.near) near.push_back(le.position);
    else far.emplace_back(le.position, le.weight);
  }
  if (E.is_full()) {
    rep.stages.push_back({"blaschke", StageStatus::Skipped, 0.0, 0.0, "E is the whole circle"});
  } else {
    // ζ0 at the middle of the widest gap, nudged off any ledger point.
    Arc widest = E.removed.front();
    for (const auto& r : E.removed)
      if (r.length() > widest.length()) widest = r;
    double theta0 = 0.5 * (widest.lo + widest.hi);
    for (int k = 0; k < 8; ++k) {
      bool clash = false;
      for (double t : near) clash = clash || std::abs(wrap_angle(t - theta0 + pi) - pi) < 1e-6;
      if (!clash) break;
      theta0 += 1e-3 * widest.length();
    }
    rep.blaschke = blaschke_sum(E, near, theta0);
    rep.stages.push_back(detail::blaschke_stage(*rep.blaschke));
  }

  // Far atoms on the circle: |Im (q+ζ)/(q-ζ)| = |cot((t-θ)/2)| on |ζ| = 1.
  FarPart fp;
  for (const auto& [t, w] : far) {
    fp.mass += w;
    fp.distance = std::min(fp.distance, E.distance(t));
  }
  if (!far.empty()) {
    if (!(fp.distance > 0.0)) throw InvalidInput("far part touches E");
    fp.bound = fp.mass / std::tan(0.5 * std::min(fp.distance, pi - 1e-12));
    for (double t : grid) {
      double s = 0.0;
      for (const auto& [a, w] : far) s += w / std::tan(0.5 * (a - t));
      fp.sup = std::max(fp.sup, std::abs(s));
    }
  }
  rep.far = fp;
  rep.stages.push_back(detail::far_stage(fp));

  const auto view = circle_view(F, E);
  rep.ac_density = ac_density_extract(view, grid);
  rep.stages.push_back(detail::density_stage(rep.ac_density));
  rep.atoms = atom_scan(view, grid, th.atom);
  rep.stages.push_back(detail::atom_stage(rep.atoms, th.atom));

  double atoms = 0.0;
  for (const auto& le : rep.ledger) atoms += le.weight;
  rep.total_mass = F(0.0).real();
  rep.mass_residual = mass_balance_residual(view, rep.total_mass, atoms);
  rep.stages.push_back(detail::stage_below("mass_balance", rep.mass_residual, th.mass, true));
  detail::finish(rep);
  return rep;
}

// Schrödinger: the examined function is g(z, x0). Potential-theoretic and
// mass stages run on the compact picture ζ = 1/(λ0 - z) with λ0 below the
// spectrum, where E becomes a compact set that contains the image 0 of ∞.
// Grid stages run on E cut at `cap`.
inline PurityReport certify(const PiecewisePotential& V, const FiniteGapSet& E, std::vector<Interval> O = {},
                            Thresholds th = {}, CertifyOptions opt = {}) {
  V.validate();
  E.validate();
  if (!E.unbounded) throw InvalidInput("Schrödinger sets are unbounded");
  if (O.empty()) O = default_neighbourhood(E);
  PurityReport rep;
  rep.operator_kind = "schrodinger";
  rep.set_description = describe(E);
  rep.thresholds = th;
  const auto bound_states = schrodinger_bound_states(V);
  double lambda0 = std::min(E.e0, V.infimum()) - 1.0;
  for (double b : bound_states) lambda0 = std::min(lambda0, b - 1.0);
  const auto cut = E.e_inf < opt.cap ? FiniteGapSet{E.e0, opt.cap, E.gaps, false}
                                     : FiniteGapSet{E.e0, E.e_inf, E.gaps, false};
  const auto grid = band_grid(cut, opt.grid_count, opt.margin);
  const AnalyticFn g = [&V, x0 = opt.x0](cplx z) { return green_diag_schrodinger(V, x0, z).g; };

  auto d = reflectionless_defect_schrodinger(V, opt.x0, E, grid);
  rep.defect_sup = d.decided_sup;
  rep.defect_mean = d.mean;
  rep.stages.push_back(detail::defect_stage(d, th.defect));

  double xi_dev = 0.0;
  bool xi_ok = true;
  for (double x : grid) {
    auto xi = xi_schrodinger(V, opt.x0, x);
    xi_ok = xi_ok && xi.decided;
    if (xi.decided) xi_dev = std::max(xi_dev, std::abs(xi.value - 0.5));
  }
  rep.xi_deviation = xi_dev;
  rep.stages.push_back(detail::stage_below("xi", xi_dev, th.xi, xi_ok));

  const auto compact = invert_set(E, lambda0);
  auto h = homogeneity_epsilon(compact);
  rep.homogeneity = h.epsilon;
  rep.stages.push_back(detail::homogeneity_stage(h));

  std::vector<double> near;
  SpectralMeasure far_mu{Space::Line, {}, {}, true};
  for (double b : bound_states) {
    if (E.contains(b)) continue;
    LedgerEntry le{b, detail::residue_weight(g, b), detail::in_open(O, b)};
    rep.ledger.push_back(le);
    if (le.near) near.push_back(1.0 / (lambda0 - b));
    else if (le.weight > 0.0) far_mu.atoms.push_back({b, le.weight});
  }
  rep.blaschke = blaschke_sum(compact, near);
  rep.stages.push_back(detail::blaschke_stage(*rep.blaschke));

  rep.far = far_part_bounded(HerglotzFunction(0.0, 0.0, far_mu, Kernel::Stieltjes), cut, grid);
  rep.stages.push_back(detail::far_stage(rep.far));

  const auto view = line_view(g, cut);
  rep.ac_density = ac_density_extract(view, grid);
  rep.stages.push_back(detail::density_stage(rep.ac_density));
  rep.atoms = atom_scan(view, grid, th.atom);
  rep.stages.push_back(detail::atom_stage(rep.atoms, th.atom));

  // Compact picture: r(ζ) = g(λ0 - 1/ζ), μ(R) = g'(λ0), atom weights η² w.
  const AnalyticFn r = [g, lambda0](cplx zeta) { return g(lambda0 - 1.0 / zeta); };
  const double step = 1e-6;
  rep.total_mass = g(cplx(lambda0, step)).imag() / step;
  double atoms = 0.0;
  for (const auto& le : rep.ledger) {
    const double eta = 1.0 / (lambda0 - le.position);
    atoms += eta * eta * le.weight;
  }
  rep.mass_residual = mass_balance_residual(line_view(r, compact), rep.total_mass, atoms);
  rep.stages.push_back(detail::stage_below("mass_balance", rep.mass_residual, th.mass, true,
                                           "compact picture about λ0 = " + std::to_string(lambda0)));
  detail::finish(rep);
  return rep;
}

}  // namespace refless
