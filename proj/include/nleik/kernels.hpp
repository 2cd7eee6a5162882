#pragma once

// Radial coupling kernels represented by their Fourier symbols as functions of
// xi = |k|^2. L-type kernels play the role of the diffusive operator (zero of
// order `multiplicity` at the origin, slope -1); J-type kernels smooth the
// gradient in the transport term and have unit mass, J(0) = 1.

#include <functional>
#include <string>
#include <vector>

namespace nleik {

enum class KernelRole { L, J };

struct KernelSymbol {
  std::string name;
  KernelRole role = KernelRole::L;
  std::function<double(double)> eval;
  int multiplicity = 1;
  double strip_half_width = 0.5;   // xi_0, recorded only
  double invert_threshold = 10.0;  // xi_m, upper end of the sampled validation band
  /// Set for symbols that must not drive time integration or asymptotic predictions.
  bool exploratory = false;
  bool integration_allowed = true;
  std::vector<double> params;

  double operator()(double xi) const { return eval(xi); }
};

/// Known names: laplacian, rational, ks, identity, bessel-smoother,
/// gaussian(sigma), reduction(b1, b2). Throws ConfigError listing the catalog
/// for anything else.
KernelSymbol kernel_catalog(const std::string& name, const std::vector<double>& params = {});

std::vector<std::string> kernel_names();

/// Parses "name" or "name(p1, p2, ...)".
KernelSymbol kernel_from_spec(const std::string& spec);

/// Canonical "name(p1, p2)" form used by config serialization.
std::string kernel_spec_string(const KernelSymbol& k);

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  double witness = 0.0;
  std::string detail;
};

struct HypothesisReport {
  std::string kernel;
  std::vector<HypothesisCheck> checks;
  std::vector<double> extra_zeros;
  int estimated_multiplicity = 0;

  bool all_passed() const;
  const HypothesisCheck* find(const std::string& check) const;
};

/// Sampled checks of the single-zero hypotheses on [0, invert_threshold]:
/// value at 0, slope at 0, absence of further zeros, boundedness. J kernels
/// are checked for unit mass instead of the zero conditions.
HypothesisReport validate_hypotheses(const KernelSymbol& sym);

/// M(xi) = -xi / L(xi) with M(0) = 1. Throws NumericalError if L fails the
/// simple-zero validation or vanishes elsewhere on the sampled band.
KernelSymbol precondition_symbol(const KernelSymbol& L);

}  // namespace nleik
