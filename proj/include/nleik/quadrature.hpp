#pragma once

#include <functional>
#include <limits>

namespace nleik {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod on [a, b]; b may be +infinity. With abs_tol > 0 the
/// worst subinterval is split until the total error is below
/// max(rel_tol * L1, abs_tol) or 2000 subintervals are in use, so the work is
/// bounded even when rounding makes rel_tol unreachable.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13,
                     double abs_tol = 0.0);

/// (1/2pi) * integral over the disc r < r_max (or the plane when r_max is
/// infinite) of g(r, theta) r dr dtheta. The angular integral uses the
/// periodic trapezoidal rule with `n_theta` nodes.
QuadResult polar_mean_integral(const std::function<double(double, double)>& g, double r_max, int n_theta = 256,
                               double rel_tol = 1e-12);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace nleik
