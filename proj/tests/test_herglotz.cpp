#include <catch_amalgamated.hpp>
#include <refless/refless.hpp>

#include <random>

using namespace refless;
using Catch::Approx;

namespace {

SpectralMeasure arcsine() {
  return {Space::Line, {}, {AcPiece::inverse_sqrt(-2.0, 2.0, [](double) { return 1.0 / pi; })}, true};
}

// -1/sqrt(z²-4) on the branch that decays at infinity, extended by symmetry.
cplx free_green(cplx z) {
  if (z.imag() < 0.0) return std::conj(free_green(std::conj(z)));
  return -1.0 / sqrt_upper(z * z - 4.0);
}

}  // namespace

TEST_CASE("quadrature handles endpoint singularities and infinite ranges") {
  auto r = integrate_band([](double l) { return 1.0 / (pi * std::sqrt(4.0 - l * l)); }, -2.0, 2.0);
  CHECK(r.converged);
  CHECK(r.value == Approx(1.0).epsilon(1e-13));
  auto t = integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0, 1.0);
  CHECK(t.value == Approx(1.0).epsilon(1e-12));
  auto [x, w] = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 14);
  CHECK(s == Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("Chebyshev interpolant reproduces smooth functions") {
  auto c = chebyshev_adaptive([](double x) { return std::exp(x) * std::sin(3 * x); }, -1.0, 2.0);
  for (double x : {-0.9, 0.1, 1.37, 1.99}) CHECK(c(x) == Approx(std::exp(x) * std::sin(3 * x)).margin(1e-11));
}

TEST_CASE("arcsine Stieltjes transform matches the closed form") {
  HerglotzFunction m(0.0, 0.0, arcsine(), Kernel::Stieltjes);
  for (cplx z : {cplx(3.0, 0.0), cplx(0.3, 0.7), cplx(-1.9, 1e-3), cplx(5.0, -2.0)})
    CHECK(std::abs(m(z) - free_green(z)) < 1e-10);
  CHECK(m.measure().total_mass() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Herglotz sign contract on random points") {
  SpectralMeasure mu = arcsine();
  mu.atoms.push_back({3.0, 0.25});
  HerglotzFunction m(0.4, 1.5, mu);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> re(-10, 10), im(1e-3, 10);
  for (int i = 0; i < 200; ++i) CHECK(m(cplx(re(rng), im(rng))).imag() > 0.0);
}

TEST_CASE("boundary values along the ladder") {
  HerglotzFunction m(0.0, 0.0, arcsine(), Kernel::Stieltjes);
  auto bv = boundary_value_line(m.as_function(), 1.9);
  CHECK(bv.converged);
  CHECK(bv.value.imag() == Approx(1.0 / std::sqrt(4.0 - 1.9 * 1.9)).epsilon(1e-8));
  auto outside = boundary_value_line(m.as_function(), 3.0);
  CHECK(std::abs(outside.value.imag()) < 1e-8);
  const Ladder short_ladder{{1e-3, 1e-4}};
  CHECK_THROWS_AS(short_ladder.validate(), InvalidInput);
}

TEST_CASE("point classification") {
  HerglotzFunction m(0.0, 0.0, arcsine(), Kernel::Stieltjes);
  CHECK(classify_point(m, 0.0).kind == PointClass::AC);
  CHECK(classify_point(m, 3.0).kind == PointClass::OutsideSupport);
  SpectralMeasure a{Space::Line, {{1.0, 0.7}}, {}, true};
  auto c = classify_point(HerglotzFunction(0.0, 0.0, a), 1.0);
  CHECK(c.kind == PointClass::PP);
  CHECK(c.mass == Approx(0.7).epsilon(1e-8));
}

TEST_CASE("Caratheodory function of normalized Lebesgue measure is 1") {
  SpectralMeasure lebesgue{Space::Circle, {}, {AcPiece::regular(0.0, 2 * pi, [](double) { return 1.0 / (2 * pi); })}, true};
  CaratheodoryFunction f(0.0, lebesgue);
  CHECK(std::abs(f(cplx(0.3, 0.4)) - 1.0) < 1e-12);
  auto bv = boundary_value_circle(f.as_function(), 1.0);
  CHECK(std::abs(bv.value - 1.0) < 1e-8);
}

TEST_CASE("disk-to-line transport: pointwise equality and atom example") {
  SpectralMeasure half{Space::Circle, {}, {AcPiece::regular(-pi / 2, pi / 2, [](double) { return 1.0 / (2 * pi); })}, true};
  CaratheodoryFunction f(0.0, half);
  auto r = mobius_disk_to_line(f, pi);
  for (cplx z : {cplx(0, 2), cplx(1, 1), cplx(-3, 0.5)})
    CHECK(std::abs(r(z) - I * f(half_plane_to_disk(z, -1.0))) < 1e-10);
  const auto& piece = r.measure().ac.at(0);
  CHECK(piece.lo >= -1.0 - 1e-12);
  CHECK(piece.hi <= 1.0 + 1e-12);

  SpectralMeasure atom{Space::Circle, {{0.0, 1.0}}, {}, true};
  auto ra = mobius_disk_to_line(CaratheodoryFunction(0.0, atom), pi);
  CHECK(std::abs(ra.c()) < 1e-12);
  REQUIRE(ra.measure().atoms.size() == 1);
  CHECK(std::abs(ra.measure().atoms[0].position) < 1e-12);
  CHECK(ra.measure().atoms[0].weight == Approx(1.0));

  auto rc = mobius_disk_to_line(CaratheodoryFunction(0.5, {Space::Circle, {}, {}, true}), 1.0);
  CHECK(rc.measure().atoms.empty());
  CHECK(rc.measure().ac.empty());
  CHECK_THROWS_AS(mobius_disk_to_line(f, 0.0), IllConditioned);
}

TEST_CASE("line inversion: atom example and compact support") {
  SpectralMeasure one{Space::Line, {{1.0, 1.0}}, {}, true};
  auto inv = mobius_line_inversion(HerglotzFunction(2.0, 0.0, one), 0.0);
  CHECK(inv.c() == Approx(2.5).epsilon(1e-12));
  REQUIRE(inv.measure().atoms.size() == 1);
  CHECK(inv.measure().atoms[0].position == Approx(-1.0));
  CHECK(inv.measure().atoms[0].weight == Approx(1.0));

  SpectralMeasure band{Space::Line, {}, {AcPiece::regular(2.0, 3.0, [](double) { return 1.0; })}, true};
  HerglotzFunction m(0.0, 0.0, band);
  auto r = mobius_line_inversion(m, 0.0);
  CHECK(r.measure().ac.at(0).lo == Approx(-0.5));
  CHECK(r.measure().ac.at(0).hi == Approx(-1.0 / 3.0));
  for (cplx z : {cplx(0, 1), cplx(0.1, 0.2), cplx(-0.4, 0.01)}) CHECK(std::abs(r(z) - m(-1.0 / z)) < 1e-10);

  auto empty = mobius_line_inversion(HerglotzFunction(5.0, 0.0, {}), 1.0);
  CHECK(std::abs(empty(cplx(0.3, 0.2)) - 5.0) < 1e-14);
  CHECK_THROWS_AS(mobius_line_inversion(m, 2.5), IllConditioned);
}
