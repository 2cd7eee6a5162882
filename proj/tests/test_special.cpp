#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "catch_amalgamated.hpp"
#include "nleik/errors.hpp"
#include "nleik/special.hpp"

using namespace nleik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// K_nu(z) = integral_0^inf exp(-z cosh t) cosh(nu t) dt, scaled by e^z to stay finite.
// The default exp_sinh tolerance is sqrt(eps); pin it well below the 1e-10 checks.
double k_oracle_scaled(int nu, double z) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double t) {
    const double a = z * (std::cosh(t) - 1.0);
    return 0.5 * (std::exp(nu * t - a) + std::exp(-nu * t - a));
  }, 1e-15);
}

}  // namespace

TEST_CASE("Bessel K against the integral representation", "[special]") {
  for (int n = 0; n <= 120; ++n) {
    const double z = 1e-3 * std::pow(3e4, n / 120.0);
    const BesselEval b = bessel_k01(z);
    INFO("z = " << z);
    CHECK_THAT(b.k0_scaled, WithinRel(k_oracle_scaled(0, z), 1e-10));
    CHECK_THAT(b.k1_scaled, WithinRel(k_oracle_scaled(1, z), 1e-10));
    CHECK(b.method == (z <= 2.0 ? BesselMethod::series : BesselMethod::continued_fraction));
  }
}

TEST_CASE("Bessel K examples", "[special]") {
  CHECK_THAT(bessel_k0(1.0), WithinRel(0.4210244382, 1e-9));
  CHECK_THAT(bessel_k0(10.0), WithinRel(1.778006e-5, 1e-6));
  CHECK_THAT(bessel_k1(1.0), WithinRel(0.6019072302, 1e-9));
  const double z = 1e-3;
  CHECK_THAT(bessel_k0(z), WithinAbs(-std::log(z / 2.0) - kEulerGamma, 1e-5));
  CHECK_THAT(bessel_k0(z), WithinAbs(7.0237, 1e-4));
  CHECK_THROWS_AS(bessel_k0(0.0), ContractError);
  CHECK_THROWS_AS(bessel_k1(-1.0), ContractError);
  CHECK_THAT(log_bessel_k0(800.0), WithinRel(std::log(k_oracle_scaled(0, 800.0)) - 800.0, 1e-12));
}

TEST_CASE("small-z form of K0", "[special]") {
  // remainder relative to z^2 |ln z| stays bounded
  for (double z : {1e-3, 1e-2, 3e-2, 1e-1}) {
    const double rem = bessel_k0(z) - (-std::log(z / 2.0) - kEulerGamma);
    CHECK(std::abs(rem) <= z * z * std::abs(std::log(z)));
  }
}

TEST_CASE("monotonicity and the derivative recurrence", "[special][property]") {
  double k0 = HUGE_VAL, k1 = HUGE_VAL;
  for (double z = 0.01; z < 40.0; z *= 1.05) {
    const BesselEval b = bessel_k01(z);
    CHECK(b.k0 > 0.0);
    CHECK(b.k1 > 0.0);
    CHECK(b.k0 < k0);
    CHECK(b.k1 < k1);
    k0 = b.k0;
    k1 = b.k1;
    // K1' = -K0 - K1/z
    const double h = 1e-5 * z;
    const double d = (bessel_k1(z + h) - bessel_k1(z - h)) / (2.0 * h);
    CHECK_THAT(d, WithinRel(-b.k0 - b.k1 / z, 1e-6));
  }
}

TEST_CASE("outer wavenumber", "[special]") {
  CHECK_THAT(outer_wavenumber(1.0), WithinRel(0.6019072302 / 0.4210244382, 1e-9));
  CHECK(outer_wavenumber(30.0) > 1.0);
  CHECK(outer_wavenumber(30.0) < 1.02);
  const double x = 1e-3;
  CHECK_THAT(x * outer_wavenumber(x) * (-std::log(x / 2.0) - kEulerGamma), WithinAbs(1.0, 1e-2));
  CHECK_THROWS_AS(outer_wavenumber(0.0), ContractError);
}

TEST_CASE("cutoff and core ansatz", "[special]") {
  CHECK(cutoff(0.5) == 0.0);
  CHECK(cutoff(1.0) == 0.0);
  CHECK(cutoff(2.0) == 1.0);
  CHECK(cutoff(3.0) == 1.0);
  CHECK(core_ansatz(0.1, 5.0) == 0.0);
  CHECK_THAT(core_ansatz(1.0, 3.0), WithinRel(-std::log(0.0347395), 1e-5));
  CHECK_THAT(core_ansatz(1.0, 3.0), WithinAbs(3.3599, 1e-4));
  CHECK_THROWS_AS(core_ansatz(0.0, 1.0), ContractError);
  CHECK_THROWS_AS(core_ansatz(1.0, -1.0), ContractError);

  SECTION("derivative beyond the cutoff is lambda K1/K0") {
    for (double r : {3.0, 4.0, 9.0}) {
      CHECK_THAT(core_ansatz_derivative(0.7, r), WithinRel(0.7 * outer_wavenumber(0.7 * r), 1e-12));
    }
  }
  SECTION("C1 across the transition") {
    for (double x : {1.0, 2.0}) {
      const double lambda = 0.5, r = x / lambda, h = 1e-7;
      const double left = (core_ansatz(lambda, r - h) - core_ansatz(lambda, r - 2 * h)) / h;
      const double right = (core_ansatz(lambda, r + 2 * h) - core_ansatz(lambda, r + h)) / h;
      CHECK_THAT(left, WithinAbs(right, 1e-6));
      CHECK_THAT(core_ansatz_derivative(lambda, r), WithinAbs(0.5 * (left + right), 1e-6));
    }
  }
  SECTION("radial residual at lambda r = 5") { CHECK(core_ansatz_residual(1.0, 4.99, 5.01, 3) < 1e-8); }
}
