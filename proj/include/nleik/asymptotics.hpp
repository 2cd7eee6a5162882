#pragma once

// Frequency predictions for radial pacemakers and the coefficients of the
// intermediate (logarithmic) approximation.
//
// All routines take the radial profile g(r) of a forcing; the pacemaker
// regime is eps * M < 0 with M = integral of g(r) r dr.

#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "nleik/forcing.hpp"
#include "nleik/kernels.hpp"

namespace nleik {

using RadialFunction = std::function<double(double)>;

struct RadialSolution {
  std::vector<double> r;
  std::vector<double> zeta;
  double omega = 0.0;
  double boundary_residual = 0.0;
};

/// M = integral_0^inf g(r) r dr.
double radial_mass(const RadialFunction& g);

/// zeta_1(r) = -(1/r) integral_0^r g(s) s ds on n uniform nodes of [0, r_max].
RadialSolution inner_zeta1(const RadialFunction& g, double r_max = 20.0, int n = 2001);
/// Throws ContractError for non-radial forcings.
RadialSolution inner_zeta1(const ForcingSpec& g, double r_max = 20.0, int n = 2001);

struct RcOptions {
  double r_start = 4.0;
  double r_max = 1e4;
  double tol = 1e-6;
};

struct RcResult {
  double r_c = 0.0;
  double radius = 0.0;  // outermost radius used
  double last_change = 0.0;
};

/// ln r_c = lim_{R -> inf} [ln R - (1/M^2) integral_0^R zeta_1^2 r dr], with R
/// doubled until successive values differ by less than tol. Throws
/// ContractError for M = 0, NumericalError if r_max is reached first.
RcResult inner_rc(const RadialFunction& g, const RcOptions& opt = {});

struct MatchedFrequency {
  double lambda = 0.0;
  double omega = 0.0;
};

/// omega = 4 exp(-2 gamma) / r_c^2 * exp(2 / (eps M)). Throws ContractError
/// unless eps M < 0.
MatchedFrequency matched_omega(double eps, double M, double r_c);

struct ShootResult {
  double omega = 0.0;
  double radius = 0.0;
  double mismatch = 0.0;
  int iterations = 0;
  RadialSolution solution;
};

/// Bisection in ln(omega) over omega_guess * [1e-2, 1e2]. The Riccati
/// equation is integrated inward from zeta(R) = sqrt(omega) K1/K0(sqrt(omega) R)
/// and the mismatch is taken against the regular core solution at r = 0.1.
/// `radius` <= 0 picks
/// max(12, 10/sqrt(omega_guess)). eps = 0 returns omega = 0.
ShootResult shoot_omega(double eps, const RadialFunction& g, double radius = 0.0, double omega_guess = 0.0);

struct SchrodingerResult {
  double omega = 0.0;     // Richardson value -E0
  double e0_coarse = 0.0;  // n cells
  double e0_fine = 0.0;    // 2n cells
  double radius = 0.0;
  int cells = 0;
  bool ground_state_positive = false;
  std::vector<double> r;
  std::vector<double> psi;  // normalized ground state on the fine grid
};

/// Cell-centered finite differences for -u'' - u'/r + V u on [0, R] with
/// regularity at 0 and Dirichlet at R, V = eps g. Returns -E0.
SchrodingerResult schrodinger_ground(double eps, const RadialFunction& g, double radius, int cells);

/// Symmetric tridiagonal form of the radial operator, exposed for oracles.
struct RadialTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
  std::vector<double> r;
};
RadialTridiagonal radial_operator(const RadialFunction& potential, double radius, int cells);
/// Smallest eigenvalue by Sturm-sequence bisection.
double smallest_eigenvalue(const RadialTridiagonal& t);

struct IntermediateCoeffs {
  double a01 = 0.0;  // -M
  double a0 = 0.0;   // eps * a01
  /// a_alpha for 0 < |alpha| <= m; a_{-alpha} = conj(a_alpha).
  std::map<int, std::complex<double>> a_alpha;
  int max_order = -1;
};

/// a_alpha = (1/(2 pi |alpha|)) integral (M * g) r^|alpha| e^{i alpha theta} dA.
/// The weight (x + i y)^|alpha| is harmonic, so any precondition symbol with
/// M(0) = 1 leaves a_alpha unchanged; closed-form forcings are integrated in
/// polar coordinates, sampled ones on the grid after applying `precond`.
IntermediateCoeffs intermediate_coeffs(double eps, const ForcingSpec& g, const KernelSymbol& precond);

/// Single coefficient; throws ContractError when |alpha| exceeds the order
/// permitted by the forcing's decay class.
std::complex<double> a_alpha(const ForcingSpec& g, const KernelSymbol& precond, int alpha);

/// Grid evaluation of a_alpha with M * g applied spectrally.
std::complex<double> a_alpha_grid(const ScalarField& g, const KernelSymbol& precond, int alpha);

/// max |psi'' + psi'/r - psi'^2| over [r_lo, r_hi] for psi = -ln(1 - a0 ln r),
/// by fourth-order differences. Throws ContractError for a0 < 0 or when
/// 1 - a0 ln r < 0.05 on the stencil.
double intermediate_residual(double a0, double r_lo = 2.0, double r_hi = 100.0, int samples = 400);

struct AsymptoticsResult {
  double eps = 0.0;
  double M = 0.0;
  double a01 = 0.0;
  double a0 = 0.0;
  double r_c = 0.0;
  double lambda_matched = 0.0;
  double omega_matched = 0.0;
  double omega_shoot = 0.0;
  double omega_schrodinger = 0.0;
  double shoot_mismatch = 0.0;
  double shoot_radius = 0.0;
  double schrodinger_radius = 0.0;
  int schrodinger_cells = 0;
};

/// Full prediction chain for a radial profile; requires eps M < 0.
AsymptoticsResult predict(double eps, const RadialFunction& g);

}  // namespace nleik
