#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wlgp/quadrature.hpp"

using wlgp::integrate;
using wlgp::integrate_2d;
using wlgp::QuadratureSpec;
using wlgp::Rect;
using wlgp::RidgeLine;

TEST_CASE("smooth 1-D integrands hit analytic values") {
  auto r1 = integrate([](double u) { return u; }, 0.0, 1.0);
  REQUIRE(r1.converged);
  CHECK_THAT(r1.value, Catch::Matchers::WithinAbs(0.5, 1e-14));

  auto r2 = integrate([](double u) { return std::sin(u); }, 0.0, M_PI);
  REQUIRE(r2.converged);
  CHECK_THAT(r2.value, Catch::Matchers::WithinRel(2.0, 1e-12));

  auto r3 = integrate([](double u) { return std::exp(u); }, 0.0, 1.0);
  REQUIRE(r3.converged);
  CHECK_THAT(r3.value, Catch::Matchers::WithinRel(std::exp(1.0) - 1.0, 1e-12));
}

TEST_CASE("integral over empty range is zero") {
  auto r = integrate([](double u) { return std::exp(u); }, 2.0, 2.0);
  REQUIRE(r.converged);
  CHECK(r.value == 0.0);
}

TEST_CASE("reversed bounds are rejected") {
  CHECK_THROWS_AS(integrate([](double u) { return u; }, 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("panel additivity") {
  auto whole = integrate([](double u) { return std::exp(-u); }, 0.0, 2.0);
  auto a = integrate([](double u) { return std::exp(-u); }, 0.0, 1.0);
  auto b = integrate([](double u) { return std::exp(-u); }, 1.0, 2.0);
  CHECK_THAT(whole.value,
             Catch::Matchers::WithinRel(a.value + b.value, 1e-12));
}

TEST_CASE("log endpoint singularity resolved by refinement alone") {
  auto r = integrate([](double u) { return std::log(u); }, 0.0, 1.0);
  REQUIRE(r.converged);
  CHECK_THAT(r.value, Catch::Matchers::WithinAbs(-1.0, 1e-10));
}

TEST_CASE("declared power singularity is removed by substitution") {
  auto half = integrate([](double u) { return 1.0 / std::sqrt(u); }, 0.0, 1.0,
                        {}, -0.5);
  REQUIRE(half.converged);
  CHECK_THAT(half.value, Catch::Matchers::WithinRel(2.0, 1e-12));

  auto steep = integrate([](double u) { return std::pow(u, -0.93); }, 0.0, 1.0,
                         {}, -0.93);
  REQUIRE(steep.converged);
  CHECK_THAT(steep.value, Catch::Matchers::WithinRel(1.0 / 0.07, 1e-10));

  auto shifted = integrate(
      [](double u) { return (1.0 + u) / std::sqrt(u); }, 0.0, 1.0, {}, -0.5);
  REQUIRE(shifted.converged);
  CHECK_THAT(shifted.value, Catch::Matchers::WithinRel(2.0 + 2.0 / 3.0, 1e-11));
}

TEST_CASE("non-integrable exponent hints are rejected") {
  CHECK_THROWS_AS(
      integrate([](double u) { return std::pow(u, -1.2); }, 0.0, 1.0, {}, -1.2),
      std::invalid_argument);
}

TEST_CASE("divergent integral reports non-convergence") {
  QuadratureSpec spec;
  spec.max_subdivisions = 300;
  auto r =
      integrate([](double u) { return std::pow(u, -1.2); }, 0.0, 1.0, spec);
  CHECK_FALSE(r.converged);
}

TEST_CASE("2-D constant and separable integrands") {
  auto one =
      integrate_2d([](double, double) { return 1.0; }, Rect{0, 1, 0, 1});
  REQUIRE(one.converged);
  CHECK_THAT(one.value, Catch::Matchers::WithinRel(1.0, 1e-13));

  auto sep = integrate_2d(
      [](double x, double y) { return std::exp(-x) * std::exp(-y); },
      Rect{0, 1, 0, 1});
  REQUIRE(sep.converged);
  const double e1 = 1.0 - std::exp(-1.0);
  CHECK_THAT(sep.value, Catch::Matchers::WithinRel(e1 * e1, 1e-12));

  auto poly = integrate_2d([](double x, double y) { return x * y * y; },
                           Rect{0, 2, 0, 1});
  REQUIRE(poly.converged);
  CHECK_THAT(poly.value, Catch::Matchers::WithinRel(2.0 / 3.0, 1e-13));
}

TEST_CASE("2-D zero-measure rectangle integrates to zero") {
  auto r = integrate_2d([](double, double) { return 1.0; }, Rect{1, 1, 0, 1});
  REQUIRE(r.converged);
  CHECK(r.value == 0.0);
}

TEST_CASE("kink along the declared ridge is handled to high accuracy") {
  auto lin = integrate_2d(
      [](double x, double y) { return std::abs(x - y); }, Rect{0, 1, 0, 1},
      RidgeLine{0.0});
  REQUIRE(lin.converged);
  CHECK_THAT(lin.value, Catch::Matchers::WithinRel(1.0 / 3.0, 1e-11));

  // |x-y|^p over the unit square: 2 / ((p+1)(p+2))
  const double p = 0.6;
  auto frac = integrate_2d(
      [p](double x, double y) { return std::pow(std::abs(x - y), p); },
      Rect{0, 1, 0, 1}, RidgeLine{0.0});
  REQUIRE(frac.converged);
  CHECK_THAT(frac.value,
             Catch::Matchers::WithinRel(2.0 / ((p + 1) * (p + 2)), 1e-9));
}

TEST_CASE("offset ridge inside a non-square rectangle") {
  // antiderivative of |z|^p twice: |z|^(p+2) / ((p+1)(p+2))
  const double p = 0.8, c = 0.5;
  auto psi = [p](double z) {
    return std::pow(std::abs(z), p + 2.0) / ((p + 1.0) * (p + 2.0));
  };
  const double expected = psi(1.5) - psi(-0.5) - psi(0.5) + psi(-1.5);
  auto r = integrate_2d(
      [p, c](double x, double y) { return std::pow(std::abs(x - y - c), p); },
      Rect{0, 2, 0, 1}, RidgeLine{c});
  REQUIRE(r.converged);
  CHECK_THAT(r.value, Catch::Matchers::WithinRel(expected, 1e-9));
}

TEST_CASE("ridge outside the rectangle degrades to plain paneling") {
  auto r = integrate_2d(
      [](double x, double y) { return std::abs(x - y); }, Rect{0, 1, 2, 3},
      RidgeLine{0.0});
  REQUIRE(r.converged);
  // x - y < 0 throughout: integrand is (y - x), smooth
  CHECK_THAT(r.value, Catch::Matchers::WithinRel(2.0, 1e-12));
}

TEST_CASE("smoothed minimum kernel with exponential taper") {
  // exp(-v) exp(-u) min(1-v, 1-u) over the unit square, kink at v = u.
  auto r = integrate_2d(
      [](double v, double u) {
        return std::exp(-v) * std::exp(-u) * std::min(1.0 - v, 1.0 - u);
      },
      Rect{0, 1, 0, 1}, RidgeLine{0.0});
  REQUIRE(r.converged);
  const double expected = -0.5 + 2.0 * std::exp(-1.0) - 0.5 * std::exp(-2.0);
  CHECK_THAT(r.value, Catch::Matchers::WithinAbs(expected, 1e-8));
}

TEST_CASE("edge power behavior handled by anisotropic refinement") {
  auto r = integrate_2d(
      [](double x, double y) { return std::pow(1.0 - x, 1.4) * std::exp(y); },
      Rect{0, 1, 0, 1});
  REQUIRE(r.converged);
  CHECK_THAT(r.value,
             Catch::Matchers::WithinRel((std::exp(1.0) - 1.0) / 2.4, 1e-9));
}
