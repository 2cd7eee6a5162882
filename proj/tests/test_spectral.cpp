#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "nleik/errors.hpp"
#include "nleik/spectral.hpp"

using namespace nleik;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_abs(const RealVec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("grid invariants", "[spectral]") {
  const Grid2D g(16, 8, 3.0, 2.0);
  CHECK(g.x(8) == 0.0);
  CHECK(g.y(4) == 0.0);
  CHECK(Grid2D::wrap(7, 16) == 7);
  CHECK(Grid2D::wrap(8, 16) == -8);
  CHECK(Grid2D::wrap(15, 16) == -1);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double xi = g.xi(i, j);
      CHECK(xi >= 0.0);
      if (i != 0 || j != 0) CHECK(xi > 0.0);
    }
  }
  CHECK(g.xi(0, 0) == 0.0);
  CHECK_THROWS_AS(Grid2D(7, 8, 1.0, 1.0), ContractError);
  CHECK_THROWS_AS(Grid2D(6, 8, 1.0, 1.0), ContractError);
  CHECK_THROWS_AS(Grid2D(8, 8, 0.0, 1.0), ContractError);
}

TEST_CASE("forward transform of simple fields", "[spectral]") {
  const Grid2D g = Grid2D::square(32, 5.0);
  SECTION("constant") {
    ScalarField f(g);
    for (double& v : f.values) v = 3.0;
    const SpectralField s = forward(f);
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.half_nx(); ++i) {
        const double expect = (i == 0 && j == 0) ? 3.0 : 0.0;
        CHECK_THAT(std::abs(s.at(i, j) - expect), WithinAbs(0.0, 1e-14));
      }
    }
  }
  SECTION("single mode") {
    const ScalarField f = ScalarField::from_function(g, [&](double x, double) { return std::sin(kTwoPi * x / 5.0); });
    const SpectralField s = forward(f);
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.half_nx(); ++i) {
        const double expect = (i == 1 && j == 0) ? 0.5 : 0.0;
        CHECK_THAT(std::abs(s.at(i, j)), WithinAbs(expect, 1e-14));
      }
    }
    CHECK_THAT(std::abs(s.coefficient(-1, 0)), WithinAbs(0.5, 1e-14));
  }
  SECTION("size mismatch") {
    ScalarField f(g);
    f.values.resize(10);
    CHECK_THROWS_AS(forward(f), ContractError);
  }
}

TEST_CASE("round trip, linearity and Parseval on random fields", "[spectral][property]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Grid2D g(64, 32, 7.0, 3.0);
    const ScalarField a = random_band_limited(g, seed, 8, 2.0);
    const ScalarField b = random_band_limited(g, seed + 100, 10, 1.0);

    const ScalarField back = inverse(forward(a));
    CHECK(max_abs_diff(back, a) < 1e-12 * a.max_abs());

    ScalarField sum(g);
    for (std::size_t k = 0; k < sum.values.size(); ++k) sum.values[k] = 2.0 * a.values[k] - b.values[k];
    const SpectralField fa = forward(a), fb = forward(b), fs = forward(sum);
    double err = 0.0;
    for (std::size_t k = 0; k < fs.coeffs.size(); ++k) err = std::max(err, std::abs(fs.coeffs[k] - (2.0 * fa.coeffs[k] - fb.coeffs[k])));
    CHECK(err < 1e-14 * sum.max_abs());

    double mean_sq = 0.0;
    for (double v : a.values) mean_sq += v * v;
    mean_sq /= static_cast<double>(g.size());
    CHECK_THAT(fa.energy() / mean_sq, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("conjugate symmetry of real-field spectra", "[spectral]") {
  const Grid2D g = Grid2D::square(16, 1.0);
  const ScalarField f = random_band_limited(g, 9, 5, 1.0);
  const SpectralField s = forward(f);
  // Column 0 and the Nyquist column hold both (0, fy) and (0, -fy).
  for (int fy = 1; fy < 8; ++fy) {
    CHECK(std::abs(s.coefficient(0, fy) - std::conj(s.coefficient(0, -fy))) < 1e-14);
  }
}

TEST_CASE("apply_symbol examples and properties", "[spectral]") {
  const Grid2D g = Grid2D::square(32, kTwoPi);
  const ScalarField s = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });

  CHECK(max_abs_diff(apply_symbol(s, [](double) { return 1.0; }), s) < 1e-14);

  const ScalarField lap = apply_symbol(s, [](double xi) { return -xi; });
  const ScalarField rat = apply_symbol(s, [](double xi) { return -xi / (1.0 + xi); });
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    CHECK_THAT(lap.values[k], WithinAbs(-s.values[k], 1e-13));
    CHECK_THAT(rat.values[k], WithinAbs(-0.5 * s.values[k], 1e-13));
  }

  SECTION("non-finite symbol names xi") {
    try {
      apply_symbol(s, [](double xi) { return 1.0 / xi; });
      FAIL("expected ContractError");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("xi") != std::string::npos);
    }
  }

  SECTION("composition, translation and commuting with gradient") {
    const ScalarField f = random_band_limited(g, 3, 6, 1.0);
    auto s1 = [](double xi) { return std::exp(-0.1 * xi); };
    auto s2 = [](double xi) { return -xi / (1.0 + xi); };
    const ScalarField both = apply_symbol(f, [&](double xi) { return s1(xi) * s2(xi); });
    CHECK(max_abs_diff(both, apply_symbol(apply_symbol(f, s1), s2)) < 1e-12 * f.max_abs());

    // Circular shift by (3, 5) before and after.
    auto shift = [&](const ScalarField& in) {
      ScalarField out(g);
      for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) out.at((i + 3) % g.nx(), (j + 5) % g.ny()) = in.at(i, j);
      return out;
    };
    CHECK(max_abs_diff(shift(apply_symbol(f, s2)), apply_symbol(shift(f), s2)) < 1e-12);

    const auto [gx1, gy1] = gradient(apply_symbol(f, s2));
    const auto [fx, fy] = gradient(f);
    CHECK(max_abs_diff(gx1, apply_symbol(fx, s2)) < 1e-12);
    CHECK(max_abs_diff(gy1, apply_symbol(fy, s2)) < 1e-12);
  }
}

TEST_CASE("gradient", "[spectral]") {
  const Grid2D g = Grid2D::square(32, kTwoPi);
  SECTION("sin x") {
    const auto [gx, gy] = gradient(ScalarField::from_function(g, [](double x, double) { return std::sin(x); }));
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        CHECK_THAT(gx.at(i, j), WithinAbs(std::cos(g.x(i)), 1e-13));
        CHECK_THAT(gy.at(i, j), WithinAbs(0.0, 1e-13));
      }
  }
  SECTION("constant") {
    ScalarField c(g);
    for (double& v : c.values) v = 4.5;
    const auto [gx, gy] = gradient(c);
    CHECK(max_abs(gx.values) < 1e-14);
    CHECK(max_abs(gy.values) < 1e-14);
  }
  SECTION("sin x sin y against analytic partials") {
    const auto [gx, gy] =
        gradient(ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y); }));
    double ex = 0.0, ey = 0.0;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        ex = std::max(ex, std::abs(gx.at(i, j) - std::cos(g.x(i)) * std::sin(g.y(j))));
        ey = std::max(ey, std::abs(gy.at(i, j) - std::sin(g.x(i)) * std::cos(g.y(j))));
      }
    CHECK(ex < 1e-12);
    CHECK(ey < 1e-12);
  }
}

TEST_CASE("dealias", "[spectral]") {
  const Grid2D g = Grid2D::square(64, kTwoPi);
  SECTION("high mode removed, low mode kept") {
    const ScalarField hi = ScalarField::from_function(g, [](double x, double) { return std::cos(31.0 * x); });
    const ScalarField lo = ScalarField::from_function(g, [](double x, double y) { return std::cos(x + y); });
    CHECK(max_abs(inverse(dealias(forward(hi))).values) < 1e-13);
    CHECK(max_abs_diff(inverse(dealias(forward(lo))), lo) < 1e-14);
  }
  SECTION("cutoff predicate") {
    CHECK(is_dealiased(31, 0, g));
    CHECK_FALSE(is_dealiased(1, 1, g));
    CHECK_FALSE(is_dealiased(21, 0, g));  // 3*21 = 63 <= 64
    CHECK(is_dealiased(22, 0, g));
    CHECK(is_dealiased(0, 64 - 22, g));
  }
  SECTION("kept coefficients unchanged, energy not increased") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    ScalarField f(g);
    for (double& v : f.values) v = normal(rng);
    const SpectralField s = forward(f);
    const SpectralField d = dealias(s);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.half_nx(); ++i) {
        if (is_dealiased(i, j, g)) {
          CHECK(d.at(i, j) == cplx{});
        } else {
          CHECK(d.at(i, j) == s.at(i, j));
        }
      }
    CHECK(d.energy() <= s.energy());
  }
}

TEST_CASE("random band-limited fields are seeded and band-limited", "[spectral][property]") {
  const Grid2D g = Grid2D::square(32, 1.0);
  const ScalarField a = random_band_limited(g, 42, 4, 1.5);
  const ScalarField b = random_band_limited(g, 42, 4, 1.5);
  CHECK(a.values == b.values);
  CHECK_THAT(a.max_abs(), WithinAbs(1.5, 1e-14));
  CHECK_THAT(a.mean(), WithinAbs(0.0, 1e-14));
  const SpectralField s = forward(a);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.half_nx(); ++i) {
      if (i > 4 || std::abs(Grid2D::wrap(j, g.ny())) > 4) CHECK(std::abs(s.at(i, j)) < 1e-15);
    }
}
