#pragma once

// Run configuration files: `key = value` lines under `[section]` headers,
// '#' comments. Sections and keys (defaults in parentheses):
//
//   [grid]     nx (256), ny (256), lx (160), ly (160)
//   [kernels]  L (laplacian), J (identity)          name or name(p1, ...)
//   [forcing]  g (gaussian(-2)), file ()            file: checkpoint whose phi is g
//   [run]      model (eikonal | stuart-landau), epsilon (0.5), qx (0), qy (0),
//              dt (0.25), t_end (0), snapshot_stride (0), dealias (true),
//              nonlinear (true), seed (0), initial (zero | random(A)),
//              sl_twist (1)
//   [probes]   points ()                            "i,j; i,j"; empty = center
//   [analysis] eps (), simulate (false), window (0.25), n_max (8), nbins (64),
//              image (P5 | P2 | none)

#include <string>
#include <vector>

#include "nleik/integrator.hpp"

namespace nleik {

struct AnalysisConfig {
  std::vector<double> eps;
  bool simulate = false;
  double window = 0.25;
  int n_max = 8;
  int nbins = 64;
  std::string image = "P5";

  bool operator==(const AnalysisConfig&) const = default;
};

struct RunConfig {
  SimConfig sim;
  AnalysisConfig analysis;

  bool operator==(const RunConfig&) const = default;
};

struct ParseOptions {
  /// Downgrades the eps M >= 0 rejection to a warning.
  bool allow_positive_mass = false;
  /// Skip the forcing-mass check (no forcing is built).
  bool check_mass = true;
};

/// Throws ConfigError naming the line for syntax errors and unknown keys, and
/// explaining semantic violations. Warnings go to `warnings`.
RunConfig parse_config_string(const std::string& text, const ParseOptions& opt = {},
                              std::vector<std::string>* warnings = nullptr);
/// Throws IoError if the file cannot be read.
RunConfig parse_config(const std::string& path, const ParseOptions& opt = {},
                       std::vector<std::string>* warnings = nullptr);

/// Canonical text: every key, fixed order, shortest round-trip numbers.
std::string serialize_config(const RunConfig& cfg);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Parses "i,j; i,j". Throws ConfigError.
std::vector<std::pair<int, int>> parse_probes(const std::string& text);

}  // namespace nleik
