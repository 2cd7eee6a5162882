#pragma once

// Exponential time differencing (fourth-order Runge-Kutta, Cox-Matthews
// scheme with contour-averaged phi-functions) for
//
//   phi_t = L * phi - |J * grad phi|^2 + eps g
//
// on a periodic grid. The phase is carried as q.x + drift + phi_periodic;
// the drift lives in the zero Fourier mode of the state and is reported
// separately, the affine part q.x is annihilated by L.

#include <cstdint>
#include <memory>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nleik/forcing.hpp"
#include "nleik/kernels.hpp"
#include "nleik/spectral.hpp"

namespace nleik {

enum class Model { eikonal, stuart_landau };

struct SimConfig {
  Grid2D grid = Grid2D::square(256, 160.0);
  std::string L_kernel = "laplacian";
  std::string J_kernel = "identity";
  std::string forcing = "gaussian(-2)";
  /// Optional checkpoint whose phase samples replace the catalog forcing.
  std::string forcing_file;
  double epsilon = 0.5;
  double qx = 0.0;
  double qy = 0.0;
  double dt = 0.25;
  double t_end = 0.0;
  int snapshot_stride = 0;
  /// Grid indices (i, j); empty means the domain center.
  std::vector<std::pair<int, int>> probes;
  bool dealias = true;
  bool nonlinear = true;
  std::uint64_t seed = 0;
  /// "zero" or "random(amplitude)": smooth seeded field with |k| <= nx/8.
  std::string initial = "zero";
  Model model = Model::eikonal;
  /// Imaginary part b of the Stuart-Landau coupling eps (1 + i b) L.
  double sl_twist = 1.0;

  std::vector<std::pair<int, int>> probe_points() const;
  bool operator==(const SimConfig&) const = default;
};

struct SimState {
  double t = 0.0;
  ScalarField phi{Grid2D::square(8, 1.0)};  // zero-mean periodic part
  double drift = 0.0;
  double qx = 0.0;
  double qy = 0.0;

  /// q.x + drift + phi_periodic at grid point (i, j).
  double total_phase(int i, int j) const;
};

/// Kernels, forcing and parameters resolved from a SimConfig.
struct EikonalProblem {
  Grid2D grid;
  KernelSymbol L;
  KernelSymbol J;
  ForcingSpec forcing;
  double epsilon = 0.0;
  double qx = 0.0;
  double qy = 0.0;
  bool dealias = true;
  bool nonlinear = true;
};

/// Throws ConfigError for unknown names and for kernels that may not drive
/// time integration.
EikonalProblem build_problem(const SimConfig& cfg);

struct EikonalRhs {
  ScalarField periodic;  // zero mean
  double drift_rate = 0.0;
};

EikonalRhs rhs_eikonal(const SimState& state, const EikonalProblem& p);

/// exp(c), and dt-scaled phi-function combinations of Kassam & Trefethen for
/// every linear symbol value c = dt * lambda, each averaged over a unit circle
/// of 32 points centered on c.
struct EtdCoefficients {
  ComplexVec e, e2, q, f1, f2, f3;
};
EtdCoefficients etdrk4_coefficients(std::span<const cplx> linear, double dt);

class EikonalStepper {
 public:
  EikonalStepper(const EikonalProblem& p, double dt);

  double dt() const { return dt_; }
  /// Advances the full spectrum (zero mode = drift) by one step.
  void step(SpectralField& v);
  /// Nonlinear part in spectral form, -|J grad phi|^2 + eps g (dealiased product).
  void nonlinear_term(const SpectralField& v, SpectralField& out);

 private:
  EikonalProblem p_;
  double dt_;
  std::shared_ptr<const FftPlans> plans_;
  EtdCoefficients c_;
  ComplexVec dx_, dy_;  // i k J(xi), masked by the dealias filter
  double jq_x_, jq_y_;
  ComplexVec forcing_hat_;
  bool has_nonlinear_;
  // scratch
  ComplexVec work_;
  RealVec wx_, wy_;
  SpectralField nv_, na_, nb_, nc_, a_, b_, cst_;
};

SimState make_state(const SpectralField& v, double t, double qx, double qy);
SpectralField state_spectrum(const SimState& s);

/// Smooth seeded initial phase per `cfg.initial`.
ScalarField initial_phase(const SimConfig& cfg);

struct Observables {
  std::vector<double> times;
  /// probe_series[p][n] = total phase at probe p, time index n.
  std::vector<std::vector<double>> probe_series;
  std::vector<std::pair<int, int>> probes;
  std::vector<SimState> snapshots;
  SimState final_state;
  int steps = 0;
};

using SnapshotSink = std::function<void(const SimState&, int step)>;

/// Deterministic given cfg. Snapshots every `snapshot_stride` steps go to
/// `sink` when provided, else into Observables::snapshots. Throws
/// NumericalError on blow-up.
Observables run_simulation(const SimConfig& cfg, const SnapshotSink& sink = {});

}  // namespace nleik
