#include <catch_amalgamated.hpp>
#include <refless/refless.hpp>

#include <cstdlib>

using namespace refless;
using Catch::Approx;

namespace {

AcPiece arcsine_piece(double lo, double hi, double scale = 1.0) {
  return AcPiece::inverse_sqrt(lo, hi, [scale](double) { return scale / pi; });
}

const Stage& stage(const PurityReport& r, const std::string& name) {
  const Stage* s = r.stage(name);
  REQUIRE(s != nullptr);
  return *s;
}

}  // namespace

TEST_CASE("density extraction for the free Green's function") {
  const auto E = FiniteGapSet::from_bands({{-2.0, 2.0}});
  auto view = line_view([](cplx z) { return green_diag(JacobiCoefficients::free(), 0, z); }, E);
  auto rows = ac_density_extract(view, {0.0, 1.0, 3.0});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].density == Approx(1.0 / (2.0 * pi)).epsilon(1e-8));
  CHECK(rows[1].density == Approx(1.0 / (pi * std::sqrt(3.0))).epsilon(1e-8));
}

TEST_CASE("atom scan finds planted atoms and ignores band edges") {
  const auto E = FiniteGapSet::from_bands({{-2.0, 2.0}});
  const auto grid = band_grid(E, 101);
  for (double pos : {0.5, 0.5137, -1.23456}) {
    SpectralMeasure mu{Space::Line, {{pos, 0.01}}, {arcsine_piece(-2.0, 2.0)}, true};
    auto hits = atom_scan(HerglotzFunction(0.0, 0.0, mu, Kernel::Stieltjes), E, grid);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].position == Approx(pos).margin(1e-8));
    CHECK(hits[0].mass == Approx(0.01).margin(1e-7));
  }
  SpectralMeasure pure{Space::Line, {}, {arcsine_piece(-2.0, 2.0)}, true};
  CHECK(atom_scan(HerglotzFunction(0.0, 0.0, pure, Kernel::Stieltjes), E, grid).empty());
}

TEST_CASE("mass balance") {
  const auto E = FiniteGapSet::from_bands({{-2.0, 2.0}});
  SpectralMeasure pure{Space::Line, {}, {arcsine_piece(-2.0, 2.0)}, true};
  CHECK(mass_balance_check(HerglotzFunction(0.0, 0.0, pure, Kernel::Stieltjes), E) < 1e-10);
  SpectralMeasure atoms{Space::Line, {{3.0, 0.4}, {-4.0, 0.6}}, {}, true};
  CHECK(mass_balance_check(HerglotzFunction(0.0, 0.0, atoms, Kernel::Stieltjes), E) < 1e-12);
  const auto E2 = FiniteGapSet::from_bands({{-2.0, -1.0}, {1.0, 2.0}});
  SpectralMeasure mix{Space::Line, {{0.0, 0.2}, {2.5, 0.1}}, {arcsine_piece(-2.0, -1.0, 0.35), arcsine_piece(1.0, 2.0, 0.35)}, true};
  CHECK(mass_balance_check(HerglotzFunction(0.3, 0.0, mix), E2) < 1e-10);
}

TEST_CASE("measure split and far-part bound") {
  const auto E = FiniteGapSet::from_bands({{-2.0, 2.0}});
  SpectralMeasure mu{Space::Line, {{3.0, 1.0}}, {arcsine_piece(-2.0, 2.0)}, true};
  HerglotzFunction m(0.0, 0.0, mu);
  auto s = split_measure(m, {{-2.5, 2.5}}, E);
  for (int i = 0; i < 20; ++i) {
    const cplx z(-3.0 + 0.3 * i, 0.1 + 0.2 * i);
    CHECK(std::abs(s.r1(z) + s.r2(z) - m(z)) < 1e-12);
  }
  CHECK(s.r1.measure().atoms.empty());
  CHECK(s.r2.measure().atoms.size() == 1);
  auto far = far_part_bounded(s.r2, E, band_grid(E, 101));
  CHECK(far.sup <= far.bound);
  CHECK(far.distance == Approx(1.0));
}

TEST_CASE("certify: free Jacobi passes every stage") {
  auto r = certify(JacobiCoefficients::free(), FiniteGapSet::from_bands({{-2.0, 2.0}}));
  CHECK(r.verdict == Verdict::Pass);
  CHECK(r.defect_sup < 1e-6);
  CHECK(r.xi_deviation < 1e-6);
  CHECK(r.atoms.empty());
  CHECK(r.ledger.empty());
  CHECK(r.total_mass == Approx(1.0));
  CHECK(r.mass_residual < 1e-6);
  for (const char* name : {"reflectionless", "xi", "homogeneity", "blaschke", "far_part", "ac_density", "atom_scan", "mass_balance"})
    CHECK(stage(r, name).status == StageStatus::Pass);
}

TEST_CASE("certify: an impurity fails at the reflectionless stage") {
  JacobiCoefficients imp;
  imp.a_core = {1.0};
  imp.b_core = {5.0};
  auto r = certify(imp, FiniteGapSet::from_bands({{-2.0, 2.0}}));
  CHECK(r.verdict == Verdict::Fail);
  CHECK(stage(r, "reflectionless").status == StageStatus::Fail);
  REQUIRE(r.ledger.size() == 1);
  CHECK(r.ledger[0].position == Approx(std::sqrt(29.0)));
  CHECK_FALSE(r.ledger[0].near);
}

TEST_CASE("certify: periodic Jacobi and CMV operators pass") {
  auto p2 = JacobiCoefficients::periodic({1.0, 1.0}, {0.5, -0.5});
  CHECK(certify(p2, periodic_bands(p2.right)).verdict == Verdict::Pass);
  auto free_cmv = certify(VerblunskyCoefficients::free(), ArcSet::full_circle());
  CHECK(free_cmv.verdict == Verdict::Pass);
  CHECK(stage(free_cmv, "blaschke").status == StageStatus::Skipped);
  auto c2 = VerblunskyCoefficients::periodic({0.5, -0.5});
  auto r = certify(c2, periodic_arcs(c2.right));
  CHECK(r.verdict == Verdict::Pass);
  CHECK(stage(r, "blaschke").status == StageStatus::Pass);
}

TEST_CASE("certify: Schrödinger operators") {
  const auto E = FiniteGapSet::from_bands({{0.0, 100.0}}, true);
  auto free = certify(PiecewisePotential::free(), E);
  CHECK(free.verdict == Verdict::Pass);
  CHECK(free.mass_residual < 1e-6);
  auto well = certify(PiecewisePotential::from_cells({{0.0, 1.0, -10.0}}, 0.0, 0.0), E);
  CHECK(well.verdict == Verdict::Fail);
  CHECK(stage(well, "reflectionless").status == StageStatus::Fail);
}

TEST_CASE("thresholds read environment overrides") {
  setenv("REFLESS_DEFECT_TOL", "1e-9", 1);
  CHECK(Thresholds{}.with_env().defect == 1e-9);
  setenv("REFLESS_DEFECT_TOL", "nonsense", 1);
  CHECK_THROWS_AS(Thresholds{}.with_env(), InvalidInput);
  unsetenv("REFLESS_DEFECT_TOL");
  CHECK(Thresholds{}.with_env().defect == 1e-4);
}
