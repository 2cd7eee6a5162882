#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "nleik/errors.hpp"
#include "nleik/stuart_landau.hpp"

using namespace nleik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SimConfig sl_config(double eps) {
  SimConfig c;
  c.model = Model::stuart_landau;
  c.grid = Grid2D::square(32, 16.0);
  c.epsilon = eps;
  c.dt = 0.05;
  c.forcing = "gaussian(-2)";
  return c;
}

ComplexField uniform(const Grid2D& g, cplx v) {
  ComplexField z(g);
  for (cplx& x : z.values) x = v;
  return z;
}

ComplexField random_near_unit(const Grid2D& g, std::uint64_t seed) {
  const ScalarField a = random_band_limited(g, seed, 4, 0.2);
  const ScalarField p = random_band_limited(g, seed + 1, 4, 1.0);
  ComplexField z(g);
  for (std::size_t k = 0; k < z.values.size(); ++k) z.values[k] = std::polar(1.0 + a.values[k], p.values[k]);
  return z;
}

}  // namespace

TEST_CASE("Stuart-Landau right-hand side examples", "[stuart_landau]") {
  SECTION("z = 1 without coupling rotates at unit rate") {
    const SlProblem p = build_sl_problem(sl_config(0.0));
    const ComplexField r = rhs_stuart_landau(uniform(p.grid, 1.0), p);
    for (cplx v : r.values) CHECK(std::abs(v - cplx(0.0, 1.0)) < 1e-14);
  }
  SECTION("amplitude relaxes at rate -2 delta") {
    const SlProblem p = build_sl_problem(sl_config(0.0));
    const double d = 1e-6;
    const ComplexField r = rhs_stuart_landau(uniform(p.grid, 1.0 + d), p);
    CHECK_THAT(r.values[0].real() / d, WithinRel(-2.0, 1e-5));
  }
  SECTION("uniform z turns at 1 + eps^2 g") {
    const SlProblem p = build_sl_problem(sl_config(0.3));
    const ComplexField r = rhs_stuart_landau(uniform(p.grid, 1.0), p);
    for (int j = 0; j < p.grid.ny(); ++j)
      for (int i = 0; i < p.grid.nx(); ++i) {
        const double g = p.forcing.field.at(i, j);
        CHECK_THAT(r.at(i, j).imag(), WithinAbs(1.0 + 0.09 * g, 1e-12));
        CHECK_THAT(r.at(i, j).real(), WithinAbs(0.0, 1e-12));
      }
  }
}

TEST_CASE("phase rotation equivariance", "[stuart_landau][property]") {
  const SlProblem p = build_sl_problem(sl_config(0.5));
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const ComplexField z = random_near_unit(p.grid, seed);
    const cplx rot = std::polar(1.0, 0.37 * static_cast<double>(seed));
    ComplexField zr = z;
    for (cplx& v : zr.values) v *= rot;
    const ComplexField a = rhs_stuart_landau(z, p);
    const ComplexField b = rhs_stuart_landau(zr, p);
    double err = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) err = std::max(err, std::abs(b.values[k] - rot * a.values[k]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("coupling acts through the kernel on the field", "[stuart_landau]") {
  // z = exp(i sin x) on a 2 pi box: L * z with L = Laplacian, eps (1 + i) prefactor
  SimConfig c = sl_config(0.2);
  c.grid = Grid2D::square(64, 2.0 * std::numbers::pi);
  c.forcing = "gaussian(0)";
  const SlProblem p = build_sl_problem(c);
  ComplexField z(p.grid);
  for (int j = 0; j < p.grid.ny(); ++j)
    for (int i = 0; i < p.grid.nx(); ++i) z.at(i, j) = std::polar(1.0, std::sin(p.grid.x(i)));
  const ComplexField r = rhs_stuart_landau(z, p);
  double err = 0.0;
  for (int j = 0; j < p.grid.ny(); ++j)
    for (int i = 0; i < p.grid.nx(); ++i) {
      const double x = p.grid.x(i);
      // Laplacian of exp(i sin x) = (-i sin x - cos^2 x) exp(i sin x)
      const cplx lap = cplx(-std::cos(x) * std::cos(x), -std::sin(x)) * z.at(i, j);
      const cplx expect = cplx(0.0, 1.0) * z.at(i, j) + 0.2 * cplx(1.0, 1.0) * lap;
      err = std::max(err, std::abs(r.at(i, j) - expect));
    }
  CHECK(err < 1e-11);
}

TEST_CASE("time stepping", "[stuart_landau]") {
  SECTION("uncoupled unit state is an exact rotation") {
    SimConfig c = sl_config(0.0);
    c.t_end = 2.0;
    const SlRun run = run_stuart_landau(c);
    for (cplx v : run.final_z.values) CHECK(std::abs(v - std::polar(1.0, 2.0)) < 1e-10);
    for (double s : run.slow_phase[0]) CHECK_THAT(s, WithinAbs(0.0, 1e-10));
    CHECK(run.max_amplitude_deviation(0.0) < 1e-12);
  }
  SECTION("amplitude perturbations decay like exp(-2t)") {
    SimConfig c = sl_config(0.0);
    c.t_end = 3.0;
    const SlRun run = run_stuart_landau(c, uniform(c.grid, 1.01));
    const double expect = 0.01 * std::exp(-6.0);
    CHECK_THAT(run.amplitude_deviation.back(), WithinRel(expect, 0.05));
    CHECK(run.times.size() == run.amplitude_deviation.size());
  }
  SECTION("slow phase at the center follows linear phase diffusion for short times") {
    SimConfig c = sl_config(0.1);
    c.t_end = 1.0;
    c.dt = 0.01;
    const SlRun run = run_stuart_landau(c);
    // theta_t = eps Lap theta + eps^2 g from theta = 0: theta = eps^2 (e^{eps t Lap} - 1)/(eps Lap) g
    const double eps = 0.1, t = 1.0;
    const ScalarField g = forcing_from_spec(c.forcing, c.grid).field;
    const ScalarField theta = apply_symbol(g, [&](double xi) {
      const double a = -eps * xi;
      return eps * eps * (std::abs(a * t) < 1e-12 ? t : std::expm1(a * t) / a);
    });
    const double expect = theta.at(c.grid.nx() / 2, c.grid.ny() / 2);
    CHECK_THAT(expect, WithinAbs(-0.0168, 5e-4));
    CHECK_THAT(run.slow_phase[0].back(), WithinRel(expect, 0.03));
  }
  SECTION("deterministic replay") {
    SimConfig c = sl_config(0.5);
    c.t_end = 1.0;
    const ComplexField z0 = random_near_unit(c.grid, 9);
    CHECK(run_stuart_landau(c, z0).final_z.values == run_stuart_landau(c, z0).final_z.values);
  }
  SECTION("initial field on the wrong grid") {
    SimConfig c = sl_config(0.5);
    c.t_end = 1.0;
    CHECK_THROWS_AS(run_stuart_landau(c, uniform(Grid2D::square(16, 16.0), 1.0)), ContractError);
  }
}
