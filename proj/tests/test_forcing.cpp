#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "catch_amalgamated.hpp"
#include "nleik/errors.hpp"
#include "nleik/forcing.hpp"
#include "nleik/quadrature.hpp"

using namespace nleik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("quadrature on known integrals", "[quadrature]") {
  CHECK_THAT(integrate([](double x) { return std::exp(-x); }, 0.0, kInf).value, WithinRel(1.0, 1e-13));
  CHECK_THAT(integrate([](double x) { return x * std::pow(1.0 + x, -3); }, 0.0, kInf).value, WithinRel(0.5, 1e-12));
  CHECK_THAT(integrate([](double x) { return std::sin(x); }, 0.0, kPi).value, WithinRel(2.0, 1e-14));
  // (1/2pi) integral over the plane of e^{-r^2} = 1/2
  CHECK_THAT(polar_mean_integral([](double r, double) { return std::exp(-r * r); }, kInf).value,
             WithinRel(0.5, 1e-12));
  // disc of radius 1: (1/2pi) 2pi integral_0^1 r dr = 1/2
  CHECK_THAT(polar_mean_integral([](double, double) { return 1.0; }, 1.0).value, WithinRel(0.5, 1e-14));
}

TEST_CASE("catalog values", "[forcing]") {
  const Grid2D g = Grid2D::square(64, 20.0);
  const ForcingSpec g1 = forcing_from_spec("g1", g);
  const ForcingSpec g2 = forcing_from_spec("g2", g);
  const ForcingSpec ga = forcing_from_spec("gaussian(-2)", g);
  const int c = g.nx() / 2;
  CHECK(g1.field.at(c, c) == 1.0);
  CHECK(ga.field.at(c, c) == -2.0);
  CHECK(g2.closed(3.7, kPi / 4.0) == 0.0);
  CHECK(g2.closed(0.2, kPi / 4.0) == 0.0);
  CHECK(ga.is_radial());
  CHECK_FALSE(g1.is_radial());

  SECTION("sampled field matches closed form") {
    for (const ForcingSpec* f : {&g1, &g2, &ga}) {
      double err = 0.0;
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
          const double x = g.x(i), y = g.y(j);
          err = std::max(err, std::abs(f->field.at(i, j) - f->closed(std::hypot(x, y), std::atan2(y, x))));
        }
      CHECK(err < 1e-12);
    }
    // g1 by its Cartesian definition
    double err = 0.0;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i), y = g.y(j);
        err = std::max(err, std::abs(g1.field.at(i, j) - std::pow(1.0 + 3.0 * x * x + y * y, -1.5)));
      }
    CHECK(err < 1e-12);
  }
  CHECK_THROWS_AS(forcing_from_spec("g3", g), ConfigError);
  CHECK_THROWS_AS(forcing_from_spec("gaussian", g), ConfigError);
}

TEST_CASE("masses against closed forms", "[forcing]") {
  const Grid2D g = Grid2D::square(64, 20.0);
  CHECK_THAT(forcing_from_spec("gaussian(-2)", g).mass, WithinRel(-1.0, 1e-12));
  CHECK_THAT(forcing_from_spec("g1", g).mass, WithinRel(1.0 / std::sqrt(3.0), 1e-10));
  CHECK_THAT(forcing_from_spec("g2", g).mass, WithinRel(0.5, 1e-10));
  CHECK_THAT(forcing_from_spec("dipole-test", g).mass, WithinAbs(0.0, 1e-14));

  SECTION("independent tanh-sinh oracle for g1") {
    // (1/2pi) integral over the plane; inner radial integral is r/(1+a r^2)^{3/2} -> 1/a.
    boost::math::quadrature::tanh_sinh<double> ts;
    const double m = ts.integrate(
        [](double t) {
          const double a = 3.0 * std::cos(t) * std::cos(t) + std::sin(t) * std::sin(t);
          return 1.0 / a;
        },
        0.0, 2.0 * kPi) / (2.0 * kPi);
    CHECK_THAT(m, WithinRel(1.0 / std::sqrt(3.0), 1e-12));
  }
}

TEST_CASE("grid sums converge to quadrature within the tail bound", "[forcing][property]") {
  double prev = kInf;
  for (double l : {20.0, 40.0, 80.0}) {
    const Grid2D g = Grid2D::square(static_cast<int>(8 * l), l);
    const ForcingSpec f = forcing_from_spec("g2", g);
    const MassEstimate m = mass(f);
    const double gap = std::abs(m.grid_sum - m.quadrature);
    // grid sum adds a second-order quadrature error on the (1+r)^-3 cusp at r = 0
    CHECK(gap <= m.truncation_bound + 2e-2 / 8.0);
    CHECK(gap < prev);
    prev = gap;
  }
  const Grid2D g = Grid2D::square(128, 16.0);
  const MassEstimate ga = mass(forcing_from_spec("gaussian(-2)", g));
  CHECK_THAT(ga.grid_sum, WithinRel(-1.0, 1e-12));
}

TEST_CASE("mass is linear", "[forcing][property]") {
  const Grid2D g = Grid2D::square(64, 30.0);
  const ForcingSpec a = forcing_from_spec("g1", g);
  const ForcingSpec b = forcing_from_spec("g2", g);
  ForcingSpec c = a;
  c.name = "combo";
  auto ca = a.closed, cb = b.closed;
  c.closed = [ca, cb](double r, double t) { return 2.0 * ca(r, t) + 0.5 * cb(r, t); };
  for (std::size_t k = 0; k < c.field.values.size(); ++k) c.field.values[k] = 2.0 * a.field.values[k] + 0.5 * b.field.values[k];
  const MassEstimate m = mass(c);
  CHECK_THAT(m.quadrature, WithinRel(2.0 * a.mass + 0.5 * b.mass, 1e-10));
  CHECK_THAT(m.grid_sum, WithinRel(2.0 * grid_mass(a.field) + 0.5 * grid_mass(b.field), 1e-12));
}

TEST_CASE("decay classes", "[forcing]") {
  const Grid2D g = Grid2D::square(32, 10.0);
  ForcingSpec f = forcing_from_spec("g2", g);
  f.sigma = 0.9;
  CHECK_THROWS_AS(mass(f), NumericalError);
  CHECK(max_angular_order(2.4) == 1);
  CHECK(max_angular_order(4.5) == 3);
  CHECK(max_angular_order(1.0) == -1);

  const ForcingSpec s = forcing_from_field("sampled", forcing_from_spec("gaussian(-2)", g).field, 10.0);
  CHECK_FALSE(s.has_closed_form());
  CHECK_THAT(s.mass, WithinRel(-1.0, 1e-9));
  CHECK_THROWS_AS(angular_average(s), ContractError);

  const auto avg = angular_average(forcing_from_spec("g2", g));
  CHECK_THAT(avg(2.0), WithinRel(1.0 / 27.0, 1e-12));
}

TEST_CASE("closed-form angular means match the trapezoid", "[forcing]") {
  const Grid2D g = Grid2D::square(16, 8.0);
  for (const char* name : {"g1", "g2", "dipole-test"}) {
    ForcingSpec f = forcing_from_spec(name, g);
    REQUIRE(f.average);
    const auto closed = angular_average(f);
    f.average = nullptr;
    const auto trap = angular_average(f, 512);
    for (double r : {0.0, 0.3, 1.0, 5.0, 40.0, 1e3}) {
      INFO(name << " r = " << r);
      CHECK_THAT(closed(r), WithinAbs(trap(r), 1e-14 * std::max(1.0, std::abs(trap(r))) + 1e-15 * std::abs(trap(r))));
      CHECK_THAT(closed(r), WithinRel(trap(r), 1e-12) || WithinAbs(0.0, 1e-300));
    }
  }
}
