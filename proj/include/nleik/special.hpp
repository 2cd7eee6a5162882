#pragma once

// Modified Bessel functions of the second kind K0, K1 for real z > 0, the
// outer wavenumber profile F = K1/K0 and the cut-off core profile
// -chi(lambda r) ln K0(lambda r).

namespace nleik {

inline constexpr double kEulerGamma = 0.5772156649015329;

enum class BesselMethod { series, continued_fraction };

struct BesselEval {
  double z = 0.0;
  double k0 = 0.0;
  double k1 = 0.0;
  /// exp(z) K0(z), exp(z) K1(z); finite where K0, K1 underflow.
  double k0_scaled = 0.0;
  double k1_scaled = 0.0;
  BesselMethod method = BesselMethod::series;
};

/// Power series for z <= 2, Steed's continued fraction above. Throws
/// ContractError (domain) for z <= 0.
BesselEval bessel_k01(double z);
double bessel_k0(double z);
double bessel_k1(double z);
/// ln K0(z) without underflow for large z.
double log_bessel_k0(double z);

/// F(xi) = K1(xi)/K0(xi) = -K0'(xi)/K0(xi).
double outer_wavenumber(double xi);

/// C-infinity cut-off: 0 for x <= 1, 1 for x >= 2.
double cutoff(double x);
double cutoff_derivative(double x);

/// -chi(lambda r) ln K0(lambda r). Throws ContractError for lambda <= 0 or r < 0.
double core_ansatz(double lambda, double r);
double core_ansatz_derivative(double lambda, double r);

/// max over the given radii of |psi'' + psi'/r - psi'^2 + lambda^2| for
/// psi = -ln K0(lambda r), using fourth-order finite differences of the
/// implemented K0.
double core_ansatz_residual(double lambda, double r_lo, double r_hi, int samples = 200);

}  // namespace nleik
