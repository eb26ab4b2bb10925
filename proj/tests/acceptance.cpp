// Acceptance suite: one PASS/FAIL line per criterion with its runtime.
#include <refless/refless.hpp>

#include <Eigen/Dense>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace refless;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Resolvent entry ((J - z)^{-1})_{k,k} of a finite tridiagonal matrix with
// unit off-diagonal and zero diagonal.
cplx truncated_resolvent(int size, int k, cplx z) {
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    J(i, i) = -z;
    if (i + 1 < size) J(i, i + 1) = J(i + 1, i) = 1.0;
  }
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(size);
  e(k) = 1.0;
  return J.partialPivLu().solve(e)(k);
}

// Polynomial extrapolation to u = 0 through (u_i, f_i) by Neville's scheme.
cplx extrapolate_to_zero(std::vector<double> u, std::vector<cplx> f) {
  const std::size_t n = u.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i) f[i] = (u[i + m] * f[i] - u[i] * f[i + 1]) / (u[i + m] - u[i]);
  return f[0];
}

Outcome free_jacobi_closed_forms() {
  Outcome o;
  const auto f = JacobiCoefficients::free();
  const double m_exact = (-3.0 + std::sqrt(5.0)) / 2.0, g_exact = -1.0 / std::sqrt(5.0);
  // Real arguments go through the boundary ladder, as the m-functions refuse Im z = 0.
  const cplx z3(3.0, 0.0);
  const cplx mp = boundary_value_line([&](cplx z) { return m_halflattice(f, Side::Plus, 0, z); }, 3.0).value;
  const cplx g3 = boundary_value_line([&](cplx z) { return green_diag(f, 0, z); }, 3.0).value;
  const auto g0 = boundary_value_line([&](cplx z) { return green_diag(f, 0, z); }, 0.0);
  o.check(std::abs(mp - m_exact) < 1e-8, "m+(3) analytic " + fmt(std::abs(mp - m_exact)));
  o.check(std::abs(g3 - g_exact) < 1e-8, "g(3) analytic " + fmt(std::abs(g3 - g_exact)));
  o.check(g0.converged && std::abs(g0.value - 0.5 * I) < 1e-8, "g(0+i0) analytic " + fmt(std::abs(g0.value - 0.5 * I)));

  // 400x400 truncations: the half-line m+ uses sites 1..400, g uses a
  // window centred on site 0.
  const cplx mp_t = truncated_resolvent(400, 0, z3);
  const cplx g3_t = truncated_resolvent(400, 200, z3);
  o.check(std::abs(mp - mp_t) < 1e-8, "m+(3) truncation " + fmt(std::abs(mp - mp_t)));
  o.check(std::abs(g3 - g3_t) < 1e-8, "g(3) truncation " + fmt(std::abs(g3 - g3_t)));
  // g(iε) is even and analytic in ε; extrapolate the truncated values in ε².
  std::vector<double> u;
  std::vector<cplx> vals;
  for (double e : {0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5}) {
    u.push_back(e * e);
    vals.push_back(truncated_resolvent(400, 200, cplx(0.0, e)));
  }
  const cplx g0_t = extrapolate_to_zero(u, vals);
  o.check(std::abs(g0.value - g0_t) < 1e-8, "g(0+i0) truncation " + fmt(std::abs(g0.value - g0_t)));
  return o;
}

Outcome free_jacobi_certify() {
  Outcome o;
  const auto E = FiniteGapSet::from_bands({{-2.0, 2.0}});
  const auto r = certify(JacobiCoefficients::free(), E);
  o.check(r.verdict == Verdict::Pass, "verdict " + to_string(r.verdict) + " (" + r.reason + ")");
  double dev = 0.0;
  for (double x : band_grid(E, 101)) dev = std::max(dev, std::abs(xi_function(JacobiCoefficients::free(), 0, x).value - 0.5));
  o.check(dev < 1e-6, "xi deviation " + fmt(dev));
  o.check(r.xi_deviation < 1e-6, "report xi deviation " + fmt(r.xi_deviation));
  o.check(r.atoms.empty(), std::to_string(r.atoms.size()) + " atoms");
  o.check(r.mass_residual < 1e-6, "mass residual " + fmt(r.mass_residual));
  return o;
}

std::string first_failing_stage(const PurityReport& r) {
  for (const auto& s : r.stages)
    if (s.status == StageStatus::Fail) return s.name;
  return "";
}

Outcome periodic_bands_and_impurity() {
  Outcome o;
  const auto p2 = JacobiCoefficients::periodic({1.0, 1.0}, {0.5, -0.5});
  const auto E2 = periodic_bands(p2.right);
  o.check(E2.bands().size() == 2, "expected two bands");
  for (const auto& b : E2.bands()) {
    const auto band = FiniteGapSet::from_bands({b});
    const auto d = reflectionless_defect(p2, 0, band, band_grid(band, 101));
    o.check(d.sup < 1e-4 && d.undecided == 0, "band defect " + fmt(d.sup));
  }
  auto imp = JacobiCoefficients::free();
  imp.a_core = {1.0};
  imp.b_core = {5.0};
  const auto r = certify(imp, FiniteGapSet::from_bands({{-2.0, 2.0}}));
  o.check(r.verdict == Verdict::Fail, "impurity verdict " + to_string(r.verdict));
  o.check(first_failing_stage(r) == "reflectionless", "impurity fails at '" + first_failing_stage(r) + "'");
  return o;
}

Outcome cmv_borg_case() {
  Outcome o;
  const auto f = VerblunskyCoefficients::free();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> rad(0.0, 0.95), ang(0.0, 2.0 * pi);
  std::uniform_int_distribution<long> site(-5, 5);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const cplx z = std::polar(rad(rng), ang(rng));
    worst = std::max(worst, std::abs(M11_cmv(f, site(rng), z) - 1.0));
  }
  o.check(worst < 1e-8, "M11 - 1 " + fmt(worst));
  double xi_worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    const auto x = xi_cmv(f, 0, 2.0 * pi * (i + 0.5) / 64.0);
    xi_worst = std::max(xi_worst, x.decided ? std::abs(x.value) : inf);
  }
  o.check(xi_worst < 1e-6, "Xi " + fmt(xi_worst));
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  double unit = 0.0;
  for (int s = 0; s < 5; ++s) {
    VerblunskyCoefficients c;
    c.n_min = -3;
    for (int k = 0; k < 7; ++k) c.core.push_back(cplx(U(rng), U(rng)));
    for (auto [lo, hi] : {std::pair{-8L, 7L}, std::pair{-7L, 8L}, std::pair{-2L, 2L}}) {
      const auto u = build_cmv(c, lo, hi);
      const auto n = u.rows();
      unit = std::max(unit, (u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff());
    }
  }
  o.check(unit < 1e-12, "unitarity " + fmt(unit));
  const auto r = certify(f, ArcSet::full_circle());
  o.check(r.verdict == Verdict::Pass, "verdict " + to_string(r.verdict) + " (" + r.reason + ")");
  const auto* b = r.stage("blaschke");
  o.check(b && b->status == StageStatus::Skipped, "blaschke stage not skipped");
  return o;
}

Outcome cmv_convention() {
  Outcome o;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0), rad(0.0, 0.9), ang(0.0, 2.0 * pi);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    VerblunskyCoefficients c;
    c.n_min = -4;
    for (int k = 0; k < 9; ++k) {
      cplx a(U(rng), U(rng));
      c.core.push_back(a * (0.85 / std::max(1.0, std::abs(a))));
    }
    if (s % 3 == 1) {
      c.left = VerblunskyTail::periodic({0.5, -0.5});
      c.right = VerblunskyTail::periodic({cplx(0.2, 0.3)});
    }
    const cplx z = std::polar(rad(rng), ang(rng));
    const long n0 = static_cast<long>(std::lround(5.0 * U(rng)));
    worst = std::max(worst, std::abs(M11_cmv(c, n0, z) - M11_cmv_direct(c, n0, z)));
  }
  o.check(worst < 1e-6, "composed vs direct " + fmt(worst));
  return o;
}

Outcome potential_theory() {
  Outcome o;
  const auto s1 = FiniteGapSet::from_bands({{-2.0, 2.0}});
  const auto g1 = green_data(s1);
  o.check(std::abs(g1.capacity - 1.0) < 1e-8, "cap[-2,2] " + fmt(g1.capacity - 1.0));
  const double c01 = green_data(FiniteGapSet::from_bands({{0.0, 1.0}})).capacity;
  o.check(std::abs(c01 - 0.25) < 1e-8, "cap[0,1] " + fmt(c01 - 0.25));
  const double G3 = green_eval(g1, 3.0);
  o.check(std::abs(G3 - 0.962424) < 1e-6, "G(3) " + fmt(G3 - 0.962424));
  const auto g2 = green_data(FiniteGapSet::from_bands({{-2.0, -1.0}, {1.0, 2.0}}));
  o.check(g2.critical_points.size() == 1 && std::abs(g2.critical_points[0]) < 1e-8, "one-gap critical point");
  const auto s3 = FiniteGapSet::from_bands({{-2.0, -0.5}, {0.1, 0.4}, {1.0, 2.5}});
  const double lambda0 = 0.7;
  const FinitePoleGreen direct(s3, lambda0);
  const auto image = green_data(invert_set(s3, lambda0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> re(-3.0, 3.5), im(0.05, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const cplx z(re(rng), im(rng));
    worst = std::max(worst, std::abs(direct.value(z) - green_eval_finite_pole(image, z, lambda0).value));
  }
  o.check(worst < 1e-6, "finite pole routes " + fmt(worst));
  return o;
}

Outcome blaschke_classes() {
  Outcome o;
  const auto E = FiniteGapSet::from_bands({{-2.0, 2.0}});
  const auto fast = blaschke_sum(E, [](int k) { return 2.0 + std::pow(k, -4.0); }, 60);
  const auto slow = blaschke_sum(E, [](int k) { return 2.0 + std::pow(k, -2.0); }, 60);
  o.check(fast.classification == SeriesClass::Converged, "k^-4 gave " + to_string(fast.classification));
  o.check(slow.classification == SeriesClass::Divergent, "k^-2 gave " + to_string(slow.classification));
  return o;
}

Outcome mobius_lemmas() {
  Outcome o;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> re(-5.0, 5.0), im(0.01, 5.0);

  SpectralMeasure half{Space::Circle, {{0.3, 0.05}}, {AcPiece::regular(-pi / 2, pi / 2, [](double t) { return (1.0 + 0.3 * std::cos(t)) / (2.0 * pi); })}, true};
  const CaratheodoryFunction f(0.4, half);
  const double theta0 = pi;
  const auto r = mobius_disk_to_line(f, theta0);
  double w1 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx z(re(rng), im(rng));
    w1 = std::max(w1, std::abs(r(z) - I * f(half_plane_to_disk(z, std::polar(1.0, theta0)))));
  }
  o.check(w1 < 1e-10, "disk-to-line equality " + fmt(w1));

  SpectralMeasure line{Space::Line, {{4.0, 0.3}}, {AcPiece::inverse_sqrt(-2.0, 2.0, [](double x) { return (1.0 + 0.1 * x) / pi; })}, true};
  const HerglotzFunction m(0.7, 0.0, line, Kernel::Stieltjes);
  const double lambda0 = 3.0;
  const auto inv = mobius_line_inversion(m, lambda0);
  double w2 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx zeta(re(rng), im(rng));
    w2 = std::max(w2, std::abs(inv(zeta) - m(lambda0 - 1.0 / zeta)));
  }
  o.check(w2 < 1e-10, "line inversion equality " + fmt(w2));

  SpectralMeasure unit_atom{Space::Circle, {{0.0, 1.0}}, {}, true};
  const auto ra = mobius_disk_to_line(CaratheodoryFunction(0.0, unit_atom), pi);
  const auto& ra_atoms = ra.measure().atoms;
  o.check(std::abs(ra.c()) < 1e-10, "disk-to-line d = " + fmt(ra.c()));
  o.check(ra_atoms.size() == 1 && std::abs(ra_atoms[0].position) < 1e-10 && std::abs(ra_atoms[0].weight - 1.0) < 1e-10,
          "disk-to-line atom");

  const double c = 2.0;
  SpectralMeasure one{Space::Line, {{1.0, 1.0}}, {}, true};
  const auto ia = mobius_line_inversion(HerglotzFunction(c, 0.0, one), 0.0);
  const auto& ia_atoms = ia.measure().atoms;
  o.check(std::abs(ia.c() - (c + 0.5)) < 1e-10, "inversion d - (c+1/2) = " + fmt(ia.c() - c - 0.5));
  o.check(ia_atoms.size() == 1 && std::abs(ia_atoms[0].position + 1.0) < 1e-10 && std::abs(ia_atoms[0].weight - 1.0) < 1e-10,
          "inversion atom");
  return o;
}

Outcome schrodinger_free_and_well() {
  Outcome o;
  const auto V0 = PiecewisePotential::free();
  for (double x0 : {0.0, 1.7}) {
    const auto mp = m_schrodinger_boundary(V0, Side::Plus, x0, 4.0);
    const auto mm = m_schrodinger_boundary(V0, Side::Minus, x0, 4.0);
    o.check(mp.converged && std::abs(mp.value - 2.0 * I) < 1e-8, "m+(4+i0) " + fmt(std::abs(mp.value - 2.0 * I)));
    o.check(mm.converged && std::abs(mm.value + 2.0 * I) < 1e-8, "m-(4+i0) " + fmt(std::abs(mm.value + 2.0 * I)));
    const auto M = boundary_value_line([&](cplx z) { return green_diag_schrodinger(V0, x0, z).m11; }, 4.0);
    o.check(M.converged && std::abs(M.value - I) < 1e-8, "M11(4+i0) " + fmt(std::abs(M.value - I)));
  }
  const auto E = schrodinger_essential_set(V0, 100.0);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(0.5 + 49.5 * i / 199.0);
  const auto free_defect = reflectionless_defect_schrodinger(V0, 0.0, E, grid);
  o.check(free_defect.sup < 1e-6 && free_defect.undecided == 0, "free defect " + fmt(free_defect.sup));
  const auto well = PiecewisePotential::from_cells({{0.0, 1.0, -10.0}}, 0.0, 0.0);
  const auto well_defect = reflectionless_defect_schrodinger(well, 0.0, E, grid);
  o.check(well_defect.sup > 0.01, "square well defect " + fmt(well_defect.sup));
  return o;
}

Outcome multiplicity() {
  Outcome o;
  const auto f = JacobiCoefficients::free();
  for (double x : {-1.9, -1.0, 0.0, 0.7, 1.5})
    o.check(multiplicity_classify(f, x) == Multiplicity::Two, "free at " + fmt(x));
  auto imp = JacobiCoefficients::free();
  imp.a_core = {1.0};
  imp.b_core = {5.0};
  o.check(multiplicity_classify(imp, std::sqrt(29.0)) == Multiplicity::One, "impurity eigenvalue");
  for (double x : {-3.0, 2.5, 4.0})
    o.check(multiplicity_classify(f, x) == Multiplicity::Outside, "outside at " + fmt(x));
  const auto c = VerblunskyCoefficients::free();
  for (double t : {0.3, 1.0, 2.0, 3.5, 5.9}) {
    const auto R = density_matrix_cmv(c, 0, t);
    o.check(R.converged && R.rank == 2, "CMV density rank at " + fmt(t));
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "free Jacobi closed forms", 1.0, free_jacobi_closed_forms},
      {2, "free Jacobi certification", 30.0, free_jacobi_certify},
      {3, "periodic bands and impurity", 60.0, periodic_bands_and_impurity},
      {4, "CMV free case", 30.0, cmv_borg_case},
      {5, "CMV convention oracle", 60.0, cmv_convention},
      {6, "potential theory", 10.0, potential_theory},
      {7, "Blaschke classification", 5.0, blaschke_classes},
      {8, "Mobius transports", 5.0, mobius_lemmas},
      {9, "Schrodinger free case and well", 30.0, schrodinger_free_and_well},
      {10, "multiplicity classes", 30.0, multiplicity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) o.check(false, "runtime over " + fmt(c.budget_seconds) + " s");
    failed += !o.ok;
    std::printf("%s  %2d  %-32s %7.3f s%s%s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.empty() ? "" : "  ",
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
