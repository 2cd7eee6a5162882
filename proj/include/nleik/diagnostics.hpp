#pragma once

// Observables extracted from simulation output: pattern frequency, polar
// modes, anisotropy, far-field wavenumber and algebraic decay.

#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "nleik/spectral.hpp"

namespace nleik {

struct FrequencyFit {
  double omega = 0.0;     // -slope of phi(t) over the window
  double intercept = 0.0;
  double residual = 0.0;  // rms deviation from the line
  double slope_first_half = 0.0;
  double slope_second_half = 0.0;
  std::size_t samples = 0;
  /// Window is non-monotone or the half-window slopes differ by more than 2%.
  bool transient_warning = false;
};

/// Least-squares line through the trailing `window_fraction` of the series.
/// Throws ContractError with fewer than 10 samples in the window.
FrequencyFit measure_frequency(const std::vector<double>& t, const std::vector<double>& phi,
                               double window_fraction = 0.25);

/// Angular Fourier modes f_n(r) for |n| <= n_max on circles of radius
/// r_b = (b + 1/2) r_max / nbins about a grid point. The field is evaluated on
/// each circle from its trigonometric interpolant, so no annulus is empty;
/// `samples[b]` is the number of angles used on circle b.
struct RadialProfile {
  std::pair<int, int> center;
  int n_max = 0;
  std::vector<double> radii;
  /// modes[n + n_max][b]
  std::vector<std::vector<std::complex<double>>> modes;
  std::vector<int> samples;
  std::vector<bool> valid;
  double half_width = 0.0;  // min(lx, ly) / 2; periodic ridges form near it

  std::complex<double> mode(int n, std::size_t bin) const { return modes[n + n_max][bin]; }
  std::vector<double> real_mode0() const;
  std::size_t nearest_bin(double r) const;
};

/// How the field is evaluated off the grid. `spectral` is exact for
/// band-limited fields such as simulation output; `cubic` (Catmull-Rom) is
/// local and avoids Gibbs ringing on fields with kinks or jumps.
enum class PolarInterpolation { spectral, cubic };

/// `r_max` <= 0 selects the usable radius 0.4 min(lx, ly). Throws
/// ContractError for nbins < 8 or an off-grid center.
RadialProfile polar_decompose(const ScalarField& f, std::pair<int, int> center, int n_max = 8, int nbins = 64,
                              double r_max = 0.0, PolarInterpolation method = PolarInterpolation::spectral);
RadialProfile polar_decompose(const ScalarField& f, int n_max = 8, int nbins = 64, double r_max = 0.0,
                              PolarInterpolation method = PolarInterpolation::spectral);

/// 2 pi sum_n integral |f_n|^2 r dr over the profile (midpoint rule).
double profile_energy(const RadialProfile& p);

struct Anisotropy {
  double value = 0.0;
  bool defined = false;  // false when |f_0| is below the floor
};

/// sum_{n != 0} |f_n|^2 / |f_0|^2 on bin `bin`.
Anisotropy anisotropy(const RadialProfile& p, std::size_t bin, double floor = 1e-12);
Anisotropy anisotropy_at(const RadialProfile& p, double r, double floor = 1e-12);

struct WavenumberFit {
  double k = 0.0;
  double log_coefficient = 0.0;  // a in k r + a ln r + c
  double offset = 0.0;
  double residual = 0.0;         // rms
  double r_lo = 0.0;
  double r_hi = 0.0;
};

/// Fits phi_0(r) = k r + a ln r + c on [r_lo, r_hi]. Defaults: r_lo = 3/lambda,
/// r_hi = last radius of the profile. The profile overload sets
/// `ridge_radius` to 0.9 of its half width. Throws ContractError if r_lo < 2/lambda
/// or the window is empty, NumericalError if r_hi exceeds `ridge_radius`.
WavenumberFit measure_wavenumber(const std::vector<double>& r, const std::vector<double>& phi0, double lambda_hint,
                                 double r_lo = 0.0, double r_hi = 0.0,
                                 double ridge_radius = std::numeric_limits<double>::infinity());
WavenumberFit measure_wavenumber(const RadialProfile& p, double lambda_hint, double r_lo = 0.0, double r_hi = 0.0);

struct DecayOptions {
  double r_lo = 0.0;   // 0: first sample
  double r_hi = 0.0;   // 0: last sample
  /// Regress on local maxima of |psi| instead of all samples.
  bool envelope = false;
  /// Fit psi = offset + C r^-delta (grid search in delta) instead of |psi| = C r^-delta.
  bool fit_offset = false;
  std::vector<double> gammas = {0.0};
};

struct DecayFit {
  double delta = 0.0;
  double C = 0.0;
  double offset = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double residual = 0.0;  // rms in log space (power law) or linear space (offset fit)
  std::size_t points = 0;
  bool sign_changes = false;
  /// (gamma, (2 pi integral |psi|^2 (1 + r^2)^gamma r dr)^(1/2)) over the window.
  std::vector<std::pair<double, double>> weighted_norms;
};

DecayFit decay_fit(const std::vector<double>& r, const std::vector<double>& psi, const DecayOptions& opt = {});

/// phi0(r) + ln K0(lambda r): what remains of a radial phase profile after the
/// core ansatz -ln K0(lambda r) is removed. Throws ContractError for lambda <= 0.
std::vector<double> core_residual(const std::vector<double>& r, const std::vector<double>& phi0, double lambda);

/// (sum |f|^2 (1 + r^2)^gamma dA)^(1/2), r measured from the domain center.
double weighted_norm(const ScalarField& f, double gamma);

}  // namespace nleik
