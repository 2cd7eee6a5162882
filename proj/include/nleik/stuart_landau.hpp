#pragma once

// Lattice of Stuart-Landau oscillators with a local frequency shift and
// kernel coupling,
//
//   z_t = i (1 + eps^2 g) z + (1 - |z|^2) z + eps (1 + i b) L * z,
//
// whose phase reduction at b = 1 is the eikonal equation in the slow time
// eps t with forcing eps g.

#include <optional>
#include <vector>

#include "nleik/integrator.hpp"

namespace nleik {

struct SlProblem {
  Grid2D grid;
  KernelSymbol L;
  ForcingSpec forcing;
  double epsilon = 0.0;
  double twist = 1.0;
};

SlProblem build_sl_problem(const SimConfig& cfg);

ComplexField rhs_stuart_landau(const ComplexField& z, const SlProblem& p);

class SlStepper {
 public:
  SlStepper(const SlProblem& p, double dt);
  void step(ComplexSpectrum& v);

 private:
  void nonlinear_term(const ComplexSpectrum& v, ComplexSpectrum& out);

  SlProblem p_;
  std::shared_ptr<const FftPlans> plans_;
  EtdCoefficients c_;
  RealVec shift_;  // eps^2 g
  ComplexVec work_;
  ComplexSpectrum nv_, na_, nb_, nc_, a_, b_, cst_;
};

struct SlRun {
  std::vector<double> times;
  std::vector<std::pair<int, int>> probes;
  /// unwrap(arg z) - t at each probe.
  std::vector<std::vector<double>> slow_phase;
  /// max over the grid of ||z| - 1| at each recorded time.
  std::vector<double> amplitude_deviation;
  ComplexField final_z{Grid2D::square(8, 1.0)};

  /// Largest amplitude deviation for t >= t_from.
  double max_amplitude_deviation(double t_from) const;
};

/// Starts from z = 1 unless `initial` is given. Samples every step.
SlRun run_stuart_landau(const SimConfig& cfg, const std::optional<ComplexField>& initial = std::nullopt);

}  // namespace nleik
