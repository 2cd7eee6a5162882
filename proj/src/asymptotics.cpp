#include "nleik/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "nleik/errors.hpp"
#include "nleik/quadrature.hpp"
#include "nleik/special.hpp"

namespace nleik {

namespace {

constexpr double kBlowUp = 1e6;

// Regular solution of (r zeta)' = r (zeta^2 - eps g - omega) at r0, by
// fixed-point iteration on a trapezoid grid with one Richardson step.
double regular_start(double eps, const RadialFunction& g, double omega, double r0) {
  auto solve = [&](int n) {
    const double h = r0 / n;
    std::vector<double> zeta(n + 1, 0.0), src(n + 1, 0.0);
    std::vector<double> gs(n + 1);
    for (int k = 0; k <= n; ++k) gs[k] = g(k * h);
    for (int it = 0; it < 200; ++it) {
      for (int k = 0; k <= n; ++k) src[k] = k * h * (zeta[k] * zeta[k] - eps * gs[k] - omega);
      double cum = 0.0, change = 0.0;
      for (int k = 1; k <= n; ++k) {
        cum += 0.5 * h * (src[k - 1] + src[k]);
        const double z = cum / (k * h);
        change = std::max(change, std::abs(z - zeta[k]));
        zeta[k] = z;
      }
      if (change < 1e-16) break;
    }
    return zeta[n];
  };
  const double coarse = solve(200);
  const double fine = solve(400);
  return (4.0 * fine - coarse) / 3.0;
}

struct ShotOutcome {
  double mismatch = 0.0;
  bool blew_up = false;
  RadialSolution path;
};

// Integrates inward from R, where zeta = sqrt(omega) K1/K0, to r0 and
// compares with the regular core solution. Inward is the stable direction of
// the Riccati equation, so the mismatch depends smoothly on omega.
ShotOutcome shoot_once(double eps, const RadialFunction& g, double omega, double radius, bool keep_path) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  constexpr double r0 = 0.1;
  ShotOutcome out;
  const double lambda = std::sqrt(omega);
  // s = R - r
  auto rhs = [&](const State& z, State& dz, double s) {
    const double r = radius - s;
    dz[0] = -(z[0] * z[0] - z[0] / r - eps * g(r) - omega);
  };
  State y{lambda * outer_wavenumber(lambda * radius)};
  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(y, 0.0, 1e-3);
  const double s_end = radius - r0;
  if (keep_path) {
    out.path.r.push_back(radius);
    out.path.zeta.push_back(y[0]);
  }
  while (stepper.current_time() < s_end) {
    stepper.do_step(rhs);
    const double z = stepper.current_state()[0];
    if (!std::isfinite(z) || std::abs(z) > kBlowUp) {
      out.blew_up = true;
      out.mismatch = std::copysign(std::numeric_limits<double>::infinity(), z);
      return out;
    }
    if (keep_path && stepper.current_time() < s_end) {
      out.path.r.push_back(radius - stepper.current_time());
      out.path.zeta.push_back(z);
    }
  }
  State end;
  stepper.calc_state(s_end, end);
  out.mismatch = end[0] - regular_start(eps, g, omega, r0);
  if (keep_path) {
    out.path.r.push_back(r0);
    out.path.zeta.push_back(end[0]);
    std::reverse(out.path.r.begin(), out.path.r.end());
    std::reverse(out.path.zeta.begin(), out.path.zeta.end());
    out.path.omega = omega;
    out.path.boundary_residual = out.mismatch;
  }
  return out;
}

// Thomas solve of (T - shift) x = b.
std::vector<double> tridiagonal_solve(const RadialTridiagonal& t, double shift, std::vector<double> b) {
  const std::size_t n = t.diag.size();
  std::vector<double> c(n, 0.0), d(n, 0.0);
  double denom = t.diag[0] - shift;
  c[0] = n > 1 ? t.off[0] / denom : 0.0;
  d[0] = b[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = t.diag[i] - shift - t.off[i - 1] * c[i - 1];
    if (denom == 0.0) denom = 1e-300;
    c[i] = i + 1 < n ? t.off[i] / denom : 0.0;
    d[i] = (b[i] - t.off[i - 1] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

}  // namespace

double radial_mass(const RadialFunction& g) {
  return integrate([&](double r) { return g(r) * r; }, 0.0, kInf).value;
}

RadialSolution inner_zeta1(const RadialFunction& g, double r_max, int n) {
  if (n < 2 || !(r_max > 0.0)) throw ContractError("inner_zeta1: need n >= 2 and r_max > 0");
  RadialSolution s;
  s.r.resize(n);
  s.zeta.resize(n);
  double cum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = r_max * k / (n - 1.0);
    if (k > 0) cum += integrate([&](double x) { return g(x) * x; }, s.r[k - 1], r, 1e-13, 1e-16 * std::abs(cum)).value;
    s.r[k] = r;
    s.zeta[k] = k == 0 ? 0.0 : -cum / r;
  }
  return s;
}

RadialSolution inner_zeta1(const ForcingSpec& g, double r_max, int n) {
  if (!g.is_radial()) throw ContractError("inner_zeta1: forcing '" + g.name + "' is not radial");
  return inner_zeta1(g.radial, r_max, n);
}

RcResult inner_rc(const RadialFunction& g, const RcOptions& opt) {
  const double M = radial_mass(g);
  if (std::abs(M) < 1e-14) throw ContractError("inner_rc: forcing has zero mass");
  const double m2 = M * M;
  auto cumulative = [&](double r) { return integrate([&](double x) { return g(x) * x; }, 0.0, r).value; };
  // M - cumulative(r), integrated directly so M^2 - c^2 keeps its relative accuracy in the tail
  auto remainder = [&](double r) {
    return integrate([&](double x) { return g(x) * x; }, r, kInf, 1e-13, 1e-16 * std::abs(M)).value;
  };
  auto core = integrate(
      [&](double r) {
        if (r == 0.0) return 0.0;
        const double c = cumulative(r);
        return c * c / r;
      },
      0.0, 1.0);
  auto tail = [&](double a, double b) {
    return integrate(
               [&](double r) {
                 const double t = remainder(r);
                 return t * (2.0 * M - t) / r;
               },
               a, b, 1e-10, 1e-3 * opt.tol * m2)
        .value;
  };
  // Algebraic forcings leave a tail ~ R^-(s-2) for g ~ r^-s, geometric under
  // doubling, so Aitken's delta-squared extrapolates it; exponential tails stop
  // on the raw increment.
  double R = opt.r_start;
  double value = (-core.value + tail(1.0, R)) / m2;
  double prev_step = 0.0, prev_extrap = std::numeric_limits<double>::quiet_NaN();
  while (2.0 * R <= opt.r_max) {
    const double step = tail(R, 2.0 * R) / m2;
    value += step;
    R *= 2.0;
    if (std::abs(step) < opt.tol) return RcResult{std::exp(value), R, std::abs(step)};
    const double denom = step - prev_step;
    const double extrap = prev_step != 0.0 && denom != 0.0 && step / prev_step > 0.0 && step / prev_step < 1.0
                              ? value - step * step / denom
                              : std::numeric_limits<double>::quiet_NaN();
    const double change = std::abs(extrap - prev_extrap);
    if (change < opt.tol) return RcResult{std::exp(extrap), R, change};
    prev_step = step;
    prev_extrap = extrap;
  }
  std::ostringstream os;
  os << "inner_rc: tail not converged by r = " << R << " (ln r_c estimate " << value << ")";
  throw NumericalError(os.str());
}

MatchedFrequency matched_omega(double eps, double M, double r_c) {
  if (!(eps * M < 0.0)) {
    std::ostringstream os;
    os << "matched_omega: eps*M = " << eps * M << " >= 0, no pacemaker regime";
    throw ContractError(os.str());
  }
  if (!(r_c > 0.0)) throw ContractError("matched_omega: r_c must be positive");
  const double lambda = 2.0 * std::exp(-kEulerGamma) * std::exp(1.0 / (eps * M)) / r_c;
  return {lambda, lambda * lambda};
}

ShootResult shoot_omega(double eps, const RadialFunction& g, double radius, double omega_guess) {
  ShootResult res;
  if (eps == 0.0) {
    res.solution.r = {0.0};
    res.solution.zeta = {0.0};
    return res;
  }
  const double M = radial_mass(g);
  if (!(eps * M < 0.0)) throw ContractError("shoot_omega: eps*M >= 0, no pacemaker regime");
  if (!(omega_guess > 0.0)) omega_guess = matched_omega(eps, M, inner_rc(g).r_c).omega;
  if (!(radius > 0.0)) radius = std::max(12.0, 10.0 / std::sqrt(omega_guess));
  res.radius = radius;

  double lo = std::log(omega_guess * 1e-2), hi = std::log(omega_guess * 1e2);
  const double m_lo = shoot_once(eps, g, std::exp(lo), radius, false).mismatch;
  const double m_hi = shoot_once(eps, g, std::exp(hi), radius, false).mismatch;
  if (!(m_lo * m_hi < 0.0)) {
    std::ostringstream os;
    os << "shoot_omega: no sign change of the boundary mismatch on [" << std::exp(lo) << ", " << std::exp(hi)
       << "] (mismatch " << m_lo << ", " << m_hi << "); try a larger R or eps";
    throw NumericalError(os.str());
  }
  int it = 0;
  double best = 0.5 * (lo + hi), best_mismatch = std::numeric_limits<double>::infinity();
  for (; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = shoot_once(eps, g, std::exp(mid), radius, false).mismatch;
    if (std::abs(m) < std::abs(best_mismatch)) {
      best = mid;
      best_mismatch = m;
    }
    if (std::abs(m) < 1e-10) break;
    ((m > 0.0) == (m_lo > 0.0) ? lo : hi) = mid;
  }
  res.omega = std::exp(best);
  res.iterations = it;
  ShotOutcome final = shoot_once(eps, g, res.omega, radius, true);
  res.mismatch = final.mismatch;
  res.solution = std::move(final.path);
  return res;
}

RadialTridiagonal radial_operator(const RadialFunction& potential, double radius, int cells) {
  if (cells < 4 || !(radius > 0.0)) throw ContractError("radial_operator: need cells >= 4 and radius > 0");
  const double h = radius / cells;
  const double h2 = h * h;
  RadialTridiagonal t;
  t.diag.resize(cells);
  t.off.resize(cells - 1);
  t.r.resize(cells);
  for (int i = 0; i < cells; ++i) {
    const double r = (i + 0.5) * h;
    const double r_minus = i * h;
    const double r_plus = (i + 1) * h;
    t.r[i] = r;
    // Dirichlet at R through the odd ghost value u_{n} = -u_{n-1}.
    const double plus_weight = (i == cells - 1) ? 2.0 * r_plus : r_plus;
    t.diag[i] = (plus_weight + r_minus) / (h2 * r) + potential(r);
    if (i + 1 < cells) t.off[i] = -r_plus / (h2 * std::sqrt(r * (r + h)));
  }
  return t;
}

double smallest_eigenvalue(const RadialTridiagonal& t) {
  const std::size_t n = t.diag.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i > 0 ? std::abs(t.off[i - 1]) : 0.0;
    const double b = i + 1 < n ? std::abs(t.off[i]) : 0.0;
    lo = std::min(lo, t.diag[i] - a - b);
    hi = std::max(hi, t.diag[i] + a + b);
  }
  auto count_below = [&](double x) {
    int count = 0;
    double q = t.diag[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
      if (q == 0.0) q = 1e-300;
      q = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / q;
      if (q < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (count_below(mid) >= 1 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

SchrodingerResult schrodinger_ground(double eps, const RadialFunction& g, double radius, int cells) {
  auto potential = [&](double r) { return eps * g(r); };
  const RadialTridiagonal coarse = radial_operator(potential, radius, cells);
  const RadialTridiagonal fine = radial_operator(potential, radius, 2 * cells);
  SchrodingerResult res;
  res.radius = radius;
  res.cells = cells;
  res.e0_coarse = smallest_eigenvalue(coarse);
  res.e0_fine = smallest_eigenvalue(fine);
  if (!(res.e0_fine < 0.0)) {
    std::ostringstream os;
    os << "schrodinger_ground: no negative eigenvalue (E0 = " << res.e0_fine << " on R = " << radius
       << "); domain too small or eps*M >= 0";
    throw NumericalError(os.str());
  }
  res.omega = -(4.0 * res.e0_fine - res.e0_coarse) / 3.0;

  const double shift = res.e0_fine - 1e-9 * std::max(1.0, std::abs(res.e0_fine));
  std::vector<double> y(fine.diag.size(), 1.0);
  for (int it = 0; it < 4; ++it) {
    y = tridiagonal_solve(fine, shift, y);
    double norm = 0.0;
    for (double v : y) norm = std::max(norm, std::abs(v));
    for (double& v : y) v /= norm;
  }
  double peak = 0.0;
  for (double v : y) peak = std::abs(v) > std::abs(peak) ? v : peak;
  bool positive = true;
  for (double v : y) {
    if (v * peak < 0.0 && std::abs(v) > 1e-10 * std::abs(peak)) positive = false;
  }
  res.ground_state_positive = positive;
  res.r = fine.r;
  res.psi.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) res.psi[i] = y[i] / peak / std::sqrt(fine.r[i]);
  const double psi_max = *std::max_element(res.psi.begin(), res.psi.end());
  for (double& v : res.psi) v /= psi_max;
  return res;
}

std::complex<double> a_alpha_grid(const ScalarField& g, const KernelSymbol& precond, int alpha) {
  if (alpha == 0) throw ContractError("a_alpha_grid: alpha must be non-zero");
  const ScalarField mg = apply_symbol(g, precond.eval);
  const Grid2D& grid = g.grid;
  const int a = std::abs(alpha);
  const double s = alpha > 0 ? 1.0 : -1.0;
  std::complex<double> sum{};
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const std::complex<double> w = std::pow(std::complex<double>(grid.x(i), s * grid.y(j)), a);
      sum += mg.at(i, j) * w;
    }
  }
  return sum * grid.cell_area() / (2.0 * std::numbers::pi * a);
}

std::complex<double> a_alpha(const ForcingSpec& g, const KernelSymbol& precond, int alpha) {
  const int m = max_angular_order(g.sigma);
  if (alpha == 0 || std::abs(alpha) > m) {
    std::ostringstream os;
    os << "a_alpha: |alpha| = " << std::abs(alpha) << " not in [1, " << m << "]; decay class sigma = " << g.sigma
       << " admits angular orders up to m with sigma in (m+1, m+2)";
    throw ContractError(os.str());
  }
  if (!g.has_closed_form()) return a_alpha_grid(g.field, precond, alpha);
  const int a = std::abs(alpha);
  const double s = alpha > 0 ? 1.0 : -1.0;
  auto closed = g.closed;
  const double re = polar_mean_integral(
                        [&](double r, double t) { return closed(r, t) * std::pow(r, a) * std::cos(a * t); }, kInf)
                        .value;
  const double im = polar_mean_integral(
                        [&](double r, double t) { return closed(r, t) * std::pow(r, a) * std::sin(a * t); }, kInf)
                        .value;
  return std::complex<double>(re, s * im) / static_cast<double>(a);
}

IntermediateCoeffs intermediate_coeffs(double eps, const ForcingSpec& g, const KernelSymbol& precond) {
  IntermediateCoeffs c;
  c.a01 = -g.mass;
  c.a0 = eps * c.a01;
  c.max_order = max_angular_order(g.sigma);
  for (int a = 1; a <= c.max_order; ++a) {
    const std::complex<double> v = g.is_radial() ? std::complex<double>{} : a_alpha(g, precond, a);
    c.a_alpha[a] = v;
    c.a_alpha[-a] = std::conj(v);
  }
  return c;
}

double intermediate_residual(double a0, double r_lo, double r_hi, int samples) {
  if (a0 < 0.0) throw ContractError("intermediate_residual: a0 must be non-negative");
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || samples < 2) throw ContractError("intermediate_residual: bad range");
  if (a0 == 0.0) return 0.0;
  constexpr double rel_step = 0.01;
  const double margin = 1.0 - a0 * std::log(r_hi * (1.0 + 2.0 * rel_step));
  if (margin < 0.05) {
    std::ostringstream os;
    os << "intermediate_residual: 1 - a0 ln r reaches " << margin << " on [" << r_lo << ", " << r_hi
       << "], too close to the singularity at r = exp(1/a0) = " << std::exp(1.0 / a0);
    throw ContractError(os.str());
  }
  auto psi = [a0](double r) { return -std::log1p(-a0 * std::log(r)); };
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    const double r = r_lo * std::pow(r_hi / r_lo, n / (samples - 1.0));
    const double h = rel_step * r;
    const double fm2 = psi(r - 2 * h), fm1 = psi(r - h), f0 = psi(r), fp1 = psi(r + h), fp2 = psi(r + 2 * h);
    const double d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    const double d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    worst = std::max(worst, std::abs(d2 + d1 / r - d1 * d1));
  }
  return worst;
}

AsymptoticsResult predict(double eps, const RadialFunction& g) {
  AsymptoticsResult res;
  res.eps = eps;
  res.M = radial_mass(g);
  res.a01 = -res.M;
  res.a0 = eps * res.a01;
  if (!(eps * res.M < 0.0)) throw ContractError("predict: eps*M >= 0, no pacemaker regime");
  res.r_c = inner_rc(g).r_c;
  const MatchedFrequency m = matched_omega(eps, res.M, res.r_c);
  res.lambda_matched = m.lambda;
  res.omega_matched = m.omega;
  const ShootResult shot = shoot_omega(eps, g, 0.0, m.omega);
  res.omega_shoot = shot.omega;
  res.shoot_mismatch = shot.mismatch;
  res.shoot_radius = shot.radius;
  res.schrodinger_radius = std::max(20.0, 25.0 / m.lambda);
  res.schrodinger_cells = std::min(400000, static_cast<int>(std::ceil(res.schrodinger_radius / 0.05)));
  res.omega_schrodinger = schrodinger_ground(eps, g, res.schrodinger_radius, res.schrodinger_cells).omega;
  return res;
}

}  // namespace nleik
