#include <catch_amalgamated.hpp>
#include <refless/refless.hpp>

#include <random>

using namespace refless;
using Catch::Approx;

namespace {

PiecewisePotential square_well() { return PiecewisePotential::from_cells({{0.0, 1.0, -10.0}}, 0.0, 0.0); }

PiecewisePotential staircase() {
  return PiecewisePotential::from_cells({{-1.0, 0.0, 3.0}, {0.0, 2.0, -4.0}, {2.0, 5.0, 1.0}}, 0.0, 1.0);
}

// Diagonal Green's function of -u'' + V u on [-50, 50] with Dirichlet ends,
// by second-order finite differences. Cell averages of V keep the scheme
// second order across the jumps.
cplx finite_difference_green(const PiecewisePotential& V, double x0, cplx z, double h = 1e-3) {
  const int n = static_cast<int>(std::lround(100.0 / h)) - 1;
  const int j = static_cast<int>(std::lround((x0 + 50.0) / h)) - 1;
  const double off = -1.0 / (h * h);
  std::vector<cplx> c(n), d(n);
  auto diag = [&](int i) {
    const double x = -50.0 + (i + 1) * h;
    return 2.0 / (h * h) + 0.5 * (V.at(x - 0.25 * h) + V.at(x + 0.25 * h)) - z;
  };
  c[0] = off / diag(0);
  d[0] = (j == 0 ? 1.0 / h : 0.0) / diag(0);
  for (int i = 1; i < n; ++i) {
    const cplx m = diag(i) - off * c[i - 1];
    c[i] = off / m;
    d[i] = ((i == j ? 1.0 / h : 0.0) - off * d[i - 1]) / m;
  }
  cplx u = d[n - 1];
  for (int i = n - 2; i >= j; --i) u = d[i] - c[i] * u;
  return u;
}

}  // namespace

TEST_CASE("potential construction") {
  auto V = staircase();
  CHECK(V.at(-2.0) == 0.0);
  CHECK(V.at(-0.5) == 3.0);
  CHECK(V.at(1.0) == -4.0);
  CHECK(V.at(7.0) == 1.0);
  CHECK(V.infimum() == -4.0);
  CHECK(V.threshold() == 0.0);
  CHECK_THROWS_AS(PiecewisePotential::from_cells({{0.0, 1.0, 1.0}, {1.5, 2.0, 1.0}}, 0.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(PiecewisePotential::from_cells({{0.0, 1.0, inf}}, 0.0, 0.0), InvalidInput);
}

TEST_CASE("free Weyl functions") {
  const auto V0 = PiecewisePotential::free();
  auto d = green_diag_schrodinger(V0, 0.0, 4.0);
  CHECK(std::abs(d.m_plus - 2.0 * I) < 1e-14);
  CHECK(std::abs(d.m_minus + 2.0 * I) < 1e-14);
  CHECK(std::abs(d.g - 0.25 * I) < 1e-14);
  CHECK(std::abs(d.m11 - I) < 1e-14);
  CHECK(std::abs(m_schrodinger_boundary(V0, Side::Plus, 3.0, 4.0).value - 2.0 * I) < 1e-8);
  CHECK(xi_schrodinger(V0, 0.0, 4.0).value == Approx(0.5).margin(1e-8));
  auto below = green_diag_schrodinger(V0, 0.0, -1.0);
  CHECK(below.g.real() == Approx(0.5));
  CHECK(xi_schrodinger(V0, 0.0, -1.0).value == Approx(0.0).margin(1e-8));
}

TEST_CASE("Green's function matches finite differences") {
  for (cplx z : {cplx(1.0, 1.0), cplx(-1.0, 0.5), cplx(3.0, 0.5), cplx(10.0, 2.0)})
    CHECK(std::abs(green_diag_schrodinger(staircase(), 0.25, z).g - finite_difference_green(staircase(), 0.25, z)) < 1e-5);
}

TEST_CASE("Herglotz signs and continuity of the transport") {
  const auto S = staircase();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> re(-20, 20), im(1e-3, 5);
  for (int i = 0; i < 300; ++i) {
    const cplx z(re(rng), im(rng));
    const auto d = green_diag_schrodinger(S, re(rng) / 3.0, z);
    CHECK(d.m_plus.imag() > 0.0);
    CHECK(d.m_minus.imag() < 0.0);
    CHECK(d.g.imag() > 0.0);
  }
  const cplx z(0.7, 0.3);
  cplx m = m_schrodinger(S, Side::Plus, -0.5, z);
  m = detail::riccati_step(m, 3.0, z, 0.5);
  m = detail::riccati_step(m, -4.0, z, 0.4);
  CHECK(std::abs(m - m_schrodinger(S, Side::Plus, 0.4, z)) < 1e-12);
  auto long_cell = PiecewisePotential::from_cells({{0.0, 1000.0, 5.0}}, 0.0, 0.0);
  CHECK(is_finite(green_diag_schrodinger(long_cell, 500.0, cplx(1.0, 1e-3)).g));
}

TEST_CASE("square well bound states match the transcendental equations") {
  auto bs = schrodinger_bound_states(square_well());
  REQUIRE(bs.size() == 2);
  const double k0 = std::sqrt(10.0 + bs[0]), kappa0 = std::sqrt(-bs[0]);
  const double k1 = std::sqrt(10.0 + bs[1]), kappa1 = std::sqrt(-bs[1]);
  CHECK(k0 * std::tan(k0 / 2.0) == Approx(kappa0).margin(1e-9));
  CHECK(-k1 / std::tan(k1 / 2.0) == Approx(kappa1).margin(1e-9));
  CHECK(schrodinger_bound_states(PiecewisePotential::free()).empty());
}

TEST_CASE("reflectionless defect on the half-line spectrum") {
  const auto E = schrodinger_essential_set(PiecewisePotential::free(), 100.0);
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(0.5 + 49.5 * i / 99.0);
  CHECK(reflectionless_defect_schrodinger(PiecewisePotential::free(), 0.0, E, grid).sup < 1e-6);
  CHECK(reflectionless_defect_schrodinger(square_well(), 0.0, E, grid).sup > 0.01);
  CHECK(reflectionless_defect_schrodinger(square_well(), 0.5, E, grid).sup > 0.01);
}
