#pragma once

// Subcommands behind the command-line tool. Each writes its outputs under
// `out`, finishes with manifest.json, and returns the numbers it wrote so
// tests can check them without re-reading files.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nleik/asymptotics.hpp"
#include "nleik/config.hpp"
#include "nleik/diagnostics.hpp"
#include "nleik/hierarchy.hpp"

namespace nleik {

using WarningSink = std::function<void(const std::string&)>;

struct CommandOptions {
  std::string config;  // empty: built-in defaults
  std::string out = "out";
  std::string input;   // analyze only
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool allow_positive_mass = false;
  WarningSink warn;  // message without the "WARN:" prefix
};

/// Parses `opt.config` (or defaults), applies the seed override, forwards warnings.
RunConfig load_run_config(const CommandOptions& opt, bool check_mass = true);

/// Radial profile used by the asymptotics for `cfg`'s forcing: exact for
/// radial forcings, the angular average otherwise (with a warning).
RadialFunction radial_forcing(const SimConfig& cfg, const WarningSink& warn = {});

/// predict() in the pacemaker regime; all frequencies zero otherwise.
AsymptoticsResult predict_or_zero(double eps, const RadialFunction& g);

struct RunAnalysis {
  FrequencyFit frequency;
  bool frequency_ok = false;
  RadialProfile profile;
  double lambda = 0.0;  // sqrt(omega_measured)
  WavenumberFit wavenumber;
  bool wavenumber_ok = false;
  DecayFit decay;  // core residual, offset + C r^-delta on [2/lambda, min(r_max, L/2 - 4/lambda)]
  bool decay_ok = false;
  std::vector<double> anisotropy;  // per profile bin; NaN where undefined
};

/// Frequency from the probe series, polar profile of the final phase about the
/// domain center, far-field wavenumber and core-residual decay.
RunAnalysis analyze_run(const std::vector<double>& t, const std::vector<double>& probe, const SimState& final_state,
                        const AnalysisConfig& a, const WarningSink& warn = {});

struct SimulateResult {
  RunConfig config;
  RunAnalysis analysis;
  std::optional<AsymptoticsResult> prediction;
  // Stuart-Landau runs only
  double sl_frequency_shift = 0.0;
  double sl_max_amplitude_deviation = 0.0;
  int steps = 0;
};

SimulateResult cmd_simulate(const CommandOptions& opt);

struct SweepRow {
  double eps = 0.0;
  double M = 0.0;
  double r_c = 0.0;
  double omega_matched = 0.0;
  double omega_shoot = 0.0;
  double omega_schrod = 0.0;
  double omega_measured = 0.0;  // NaN unless simulated
  double k_inf = 0.0;           // NaN unless simulated
  double fit_residual = 0.0;    // ln omega_schrod minus the fitted line
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Least squares ln omega_schrod = slope / eps + intercept.
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

/// Sweeps `analysis.eps` (or run.epsilon alone) on `workers` threads.
SweepResult cmd_sweep(const CommandOptions& opt);

struct OracleRow {
  double eps = 0.0;
  double M = 0.0;
  double r_c = 0.0;
  double a0 = 0.0;
  double omega_matched = 0.0;
  double omega_shoot = 0.0;
  double omega_schrod = 0.0;
};

std::vector<OracleRow> cmd_oracle(const CommandOptions& opt);

struct AnalyzeResult {
  RunConfig config;
  RunAnalysis analysis;
};

/// Verifies the input manifest first; throws IoError on any mismatch.
AnalyzeResult cmd_analyze(const CommandOptions& opt);

HierarchyReport cmd_hierarchy_verify(const CommandOptions& opt);

}  // namespace nleik
