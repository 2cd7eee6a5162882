#pragma once

// Phase-hierarchy operators Gamma_k = Im[e^{-i phi} Delta^k e^{i phi}] and
// Sigma_k = Re[...], their closed forms for k <= 2, the plane-wave dispersion
// relation and the zero-mode identity behind the reduction kernel
// J(xi) = sqrt(b1 + 3 b2 xi).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nleik/kernels.hpp"
#include "nleik/spectral.hpp"

namespace nleik {

struct GammaSigma {
  ScalarField gamma;
  ScalarField sigma;
  /// Fraction of the energy of e^{i phi} beyond the 2/3 cutoff.
  double aliasing_fraction = 0.0;
  bool aliasing_warning = false;  // aliasing_fraction > 1e-10
};

/// Throws ContractError for k < 1.
GammaSigma gamma_sigma_spectral(const ScalarField& phi, int k);
/// Throws ContractError unless k is 1 or 2.
GammaSigma gamma_sigma_closed(const ScalarField& phi, int k);

double dispersion(double b1, double b2, double k2);

struct ReductionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_error = 0.0;
};

/// lhs = integral b1 |grad phi|^2 + b2 (2 |Hess phi|^2 + (Delta phi)^2),
/// rhs = integral |J * grad phi|^2 with J(xi) = sqrt(b1 + 3 b2 xi).
ReductionCheck reduction_identity_check(const ScalarField& phi, double b1, double b2);

/// |J(0) q|^2: rate of the affine phase q.x; L annihilates affine functions.
double plane_wave_rate(double qx, double qy, const KernelSymbol& J);

struct HierarchyRow {
  std::string field;
  int k = 0;
  double gamma_error = 0.0;  // relative max-norm, spectral vs closed form
  double sigma_error = 0.0;
  bool aliasing_warning = false;
};

struct HierarchyReport {
  std::vector<HierarchyRow> rows;
  std::vector<std::pair<double, double>> dispersion_table;  // (k^2, omega)
  double b1 = 1.0;
  double b2 = 0.1;
  std::vector<ReductionCheck> reductions;

  double max_error() const;
  double max_reduction_error() const;
};

/// Single-mode, two-mode and `random_fields` seeded band-limited test fields
/// on `grid` for k = 1, 2, plus `random_fields` reduction checks.
HierarchyReport hierarchy_report(const Grid2D& grid, std::uint64_t seed, int random_fields = 20, double b1 = 1.0,
                                 double b2 = 0.1);

}  // namespace nleik
