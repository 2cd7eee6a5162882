#pragma once

// Localized frequency inhomogeneities g(x, y), centered at the domain center.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nleik/spectral.hpp"

namespace nleik {

struct ForcingSpec {
  std::string name;
  std::vector<double> params;
  ScalarField field;
  /// g(r, theta); empty for forcings loaded from sampled data.
  std::function<double(double, double)> closed;
  /// g(r) for radially symmetric forcings.
  std::function<double(double)> radial;
  /// Closed-form angular mean g_0(r) for catalog forcings that are not radial.
  std::function<double(double)> average;
  /// Declared weight exponent of the L^2_sigma decay class.
  double sigma = 0.0;
  /// (1/2pi) * integral of g over the plane.
  double mass = 0.0;

  bool is_radial() const { return static_cast<bool>(radial); }
  bool has_closed_form() const { return static_cast<bool>(closed); }
};

struct MassEstimate {
  double quadrature = 0.0;  // closed-form quadrature over the plane (NaN without closed form)
  double grid_sum = 0.0;    // sum g dA / 2pi over the periodic cell
  double truncation_bound = 0.0;  // (1/2pi) * integral of |g| outside the inscribed disc
};

/// Names: g1, g2, gaussian(A), dipole-test. Throws ConfigError for others.
ForcingSpec forcing_catalog(const std::string& name, const std::vector<double>& params, const Grid2D& grid);
ForcingSpec forcing_from_spec(const std::string& spec, const Grid2D& grid);
std::string forcing_spec_string(const ForcingSpec& f);
std::vector<std::string> forcing_names();

/// Wraps sampled data (e.g. a checkpoint field) as a forcing. Mass is the grid sum.
ForcingSpec forcing_from_field(const std::string& name, const ScalarField& field, double sigma);

/// Throws NumericalError when the declared decay is not integrable (sigma <= 1).
MassEstimate mass(const ForcingSpec& spec);

double grid_mass(const ScalarField& g);

/// Angular average g_0(r): the radial profile or closed-form mean when the
/// forcing has one, else an n_theta-point trapezoid (exact for angular orders
/// below n_theta).
std::function<double(double)> angular_average(const ForcingSpec& spec, int n_theta = 256);

/// Largest angular order allowed by the weight class: sigma in (m+1, m+2).
int max_angular_order(double sigma);

}  // namespace nleik
