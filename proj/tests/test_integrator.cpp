#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "nleik/errors.hpp"
#include "nleik/integrator.hpp"

using namespace nleik;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

SimConfig small_config() {
  SimConfig c;
  c.grid = Grid2D::square(32, kTwoPi);
  c.epsilon = 0.0;
  c.dt = 0.1;
  return c;
}

SimState state_of(const ScalarField& phi, double qx = 0.0, double qy = 0.0) {
  SimState s;
  s.phi = phi;
  s.qx = qx;
  s.qy = qy;
  return s;
}

double max_abs(const ScalarField& f) { return f.max_abs(); }

}  // namespace

TEST_CASE("eikonal right-hand side examples", "[integrator]") {
  SimConfig c = small_config();
  SECTION("homogeneous state") {
    const EikonalProblem p = build_problem(c);
    const EikonalRhs r = rhs_eikonal(state_of(ScalarField(c.grid)), p);
    CHECK(max_abs(r.periodic) == 0.0);
    CHECK(r.drift_rate == 0.0);
  }
  SECTION("plane wave drifts at |J(0) q|^2") {
    for (const char* j : {"identity", "bessel-smoother", "gaussian(0.5)"}) {
      c.J_kernel = j;
      const EikonalProblem p = build_problem(c);
      const EikonalRhs r = rhs_eikonal(state_of(ScalarField(c.grid), 1.0, 0.0), p);
      CHECK_THAT(r.drift_rate, WithinAbs(-1.0, 1e-14));
      CHECK(max_abs(r.periodic) < 1e-14);
    }
  }
  SECTION("sin x with local kernels") {
    const EikonalProblem p = build_problem(c);
    const ScalarField phi = ScalarField::from_function(c.grid, [](double x, double) { return std::sin(x); });
    const EikonalRhs r = rhs_eikonal(state_of(phi), p);
    // -sin x - cos^2 x = (-sin x - 1/2 cos 2x) + (-1/2)
    CHECK_THAT(r.drift_rate, WithinAbs(-0.5, 1e-14));
    for (int j = 0; j < c.grid.ny(); ++j)
      for (int i = 0; i < c.grid.nx(); ++i) {
        const double x = c.grid.x(i);
        CHECK_THAT(r.periodic.at(i, j) + r.drift_rate, WithinAbs(-std::sin(x) - std::cos(x) * std::cos(x), 1e-13));
      }
  }
  SECTION("drift is non-increasing without forcing") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const EikonalProblem p = build_problem(c);
      const EikonalRhs r = rhs_eikonal(state_of(random_band_limited(c.grid, seed, 4, 2.0), 0.3, -0.2), p);
      CHECK(r.drift_rate <= 0.0);
    }
  }
}

TEST_CASE("ETD coefficients near zero symbols", "[integrator]") {
  // at c = 0: q = dt/2, f1 = f2 = f3 = dt/6
  const std::vector<cplx> lin{cplx{0.0}, cplx{-1e-9}, cplx{-1.0}};
  const EtdCoefficients c = etdrk4_coefficients(lin, 0.5);
  CHECK_THAT(c.q[0].real(), WithinRel(0.25, 1e-13));
  CHECK_THAT(c.f1[0].real(), WithinRel(0.5 / 6.0, 1e-13));
  CHECK_THAT(c.f2[0].real(), WithinRel(0.5 / 6.0, 1e-13));
  CHECK_THAT(c.f3[0].real(), WithinRel(0.5 / 6.0, 1e-13));
  CHECK_THAT(c.q[1].real(), WithinRel(0.25, 1e-8));
  // q = (e^{c/2} - 1)/lambda at c = -0.5
  CHECK_THAT(c.q[2].real(), WithinRel((std::exp(-0.25) - 1.0) / -1.0, 1e-13));
  CHECK_THROWS_AS(etdrk4_coefficients(lin, 0.0), ContractError);
}

TEST_CASE("linear steps are the exact exponential", "[integrator]") {
  for (const char* L : {"laplacian", "rational"}) {
    for (double dt : {1e-3, 1e-1, 1.0}) {
      SimConfig c = small_config();
      c.L_kernel = L;
      c.nonlinear = false;
      const EikonalProblem p = build_problem(c);
      EikonalStepper st(p, dt);
      SpectralField v = forward(random_band_limited(c.grid, 7, 6, 1.0));
      const SpectralField v0 = v;
      st.step(v);
      const RealVec lsym = sample_symbol(c.grid, p.L.eval);
      double err = 0.0;
      for (std::size_t k = 0; k < v.coeffs.size(); ++k) {
        err = std::max(err, std::abs(v.coeffs[k] - std::exp(lsym[k] * dt) * v0.coeffs[k]));
      }
      CHECK(err < 1e-12);
    }
  }
}

TEST_CASE("rational kernel damps the xi = 1 mode by exp(-dt/2)", "[integrator]") {
  SimConfig c = small_config();
  c.L_kernel = "rational";
  c.nonlinear = false;
  EikonalStepper st(build_problem(c), 0.1);
  SpectralField v = forward(ScalarField::from_function(c.grid, [](double x, double) { return std::cos(x); }));
  const cplx before = v.at(1, 0);
  st.step(v);
  CHECK_THAT(std::abs(v.at(1, 0) / before), WithinRel(0.951229424500714, 1e-12));
}

TEST_CASE("constant phase is a fixed point", "[integrator]") {
  SimConfig c = small_config();
  EikonalStepper st(build_problem(c), 0.7);
  ScalarField f(c.grid);
  for (double& x : f.values) x = 1.25;
  SpectralField v = forward(f);
  const SpectralField v0 = v;
  for (int n = 0; n < 5; ++n) st.step(v);
  for (std::size_t k = 0; k < v.coeffs.size(); ++k) CHECK(std::abs(v.coeffs[k] - v0.coeffs[k]) < 1e-15);
}

TEST_CASE("fourth-order self-convergence", "[integrator]") {
  SimConfig c = small_config();
  c.grid = Grid2D::square(32, 4.0 * std::numbers::pi);
  c.epsilon = 0.5;
  c.forcing = "gaussian(-2)";
  c.L_kernel = "rational";
  c.J_kernel = "bessel-smoother";
  const EikonalProblem p = build_problem(c);
  const SpectralField v0 = forward(random_band_limited(c.grid, 5, 3, 0.5));
  auto solve = [&](double dt) {
    EikonalStepper st(p, dt);
    SpectralField v = v0;
    const int n = static_cast<int>(std::lround(2.0 / dt));
    for (int k = 0; k < n; ++k) st.step(v);
    return inverse(v);
  };
  std::vector<ScalarField> u;
  for (double dt : {0.4, 0.2, 0.1, 0.05}) u.push_back(solve(dt));
  const double e1 = max_abs_diff(u[0], u[1]);
  const double e2 = max_abs_diff(u[1], u[2]);
  const double e3 = max_abs_diff(u[2], u[3]);
  INFO("successive differences " << e1 << " " << e2 << " " << e3);
  CHECK_THAT(std::log2(e1 / e2), WithinAbs(4.0, 0.5));
  CHECK_THAT(std::log2(e2 / e3), WithinAbs(4.0, 0.5));
}

TEST_CASE("run_simulation basics", "[integrator]") {
  SimConfig c = small_config();
  SECTION("t_end = 0 returns the initial state") {
    c.initial = "random(0.3)";
    c.seed = 4;
    const Observables o = run_simulation(c);
    CHECK(o.steps == 0);
    CHECK(o.times.size() == 1);
    CHECK(max_abs_diff(o.final_state.phi, initial_phase(c)) < 1e-15);
  }
  SECTION("trivial dynamics keep probes at zero") {
    c.t_end = 2.0;
    c.probes = {{0, 0}, {5, 9}};
    const Observables o = run_simulation(c);
    CHECK(o.steps == 20);
    for (const auto& s : o.probe_series)
      for (double v : s) CHECK(v == 0.0);
  }
  SECTION("deterministic replay") {
    c.t_end = 3.0;
    c.epsilon = 0.5;
    c.initial = "random(1)";
    c.seed = 17;
    c.snapshot_stride = 10;
    const Observables a = run_simulation(c);
    const Observables b = run_simulation(c);
    CHECK(a.probe_series == b.probe_series);
    CHECK(a.final_state.phi.values == b.final_state.phi.values);
    CHECK(a.snapshots.size() == 4);  // steps 0, 10, 20, 30
  }
  SECTION("probes are sampled every step and agree with the final field") {
    c.t_end = 1.0;
    c.epsilon = 0.5;
    c.qx = 0.2;
    c.probes = {{3, 4}};
    const Observables o = run_simulation(c);
    CHECK(o.times.size() == 11);
    CHECK_THAT(o.probe_series[0].back(), WithinAbs(o.final_state.total_phase(3, 4), 1e-12));
  }
  SECTION("off-grid probe") {
    c.probes = {{32, 0}};
    CHECK_THROWS_AS(run_simulation(c), ConfigError);
  }
  SECTION("blow-up is reported with a time") {
    c.t_end = 10.0;
    c.initial = "random(1e200)";
    try {
      run_simulation(c);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("t =") != std::string::npos);
    }
  }
  SECTION("inadmissible kernels") {
    c.L_kernel = "ks";
    CHECK_THROWS_AS(build_problem(c), ConfigError);
    c.L_kernel = "laplacian";
    c.J_kernel = "reduction(1, 0.1)";
    CHECK_THROWS_AS(build_problem(c), ConfigError);
    c.J_kernel = "laplacian";
    CHECK_THROWS_AS(build_problem(c), ConfigError);
  }
}

TEST_CASE("state decomposition round trip", "[integrator]") {
  const Grid2D g = Grid2D::square(16, 3.0);
  ScalarField f = random_band_limited(g, 2, 2, 1.0);
  for (double& v : f.values) v += 0.75;
  const SimState s = make_state(forward(f), 1.5, 0.1, -0.3);
  CHECK_THAT(s.drift, WithinAbs(0.75, 1e-14));
  CHECK_THAT(s.phi.mean(), WithinAbs(0.0, 1e-14));
  CHECK(s.t == 1.5);
  const ScalarField back = inverse(state_spectrum(s));
  CHECK(max_abs_diff(back, f) < 1e-14);
  CHECK_THAT(s.total_phase(0, 0), WithinAbs(0.1 * g.x(0) - 0.3 * g.y(0) + f.at(0, 0), 1e-14));
}
