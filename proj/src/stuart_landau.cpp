#include "nleik/stuart_landau.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nleik/errors.hpp"

namespace nleik {

namespace {

ComplexVec linear_symbol(const SlProblem& p) {
  const Grid2D& g = p.grid;
  ComplexVec lin(g.size());
  const cplx coupling = p.epsilon * cplx(1.0, p.twist);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      lin[static_cast<std::size_t>(j) * g.nx() + i] = cplx(0.0, 1.0) + coupling * p.L(g.xi(i, j));
    }
  }
  return lin;
}

void require_finite(const ComplexVec& v, double t) {
  for (const cplx& c : v) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      std::ostringstream os;
      os << "blow-up in Stuart-Landau lattice at t = " << t;
      throw NumericalError(os.str());
    }
  }
}

}  // namespace

SlProblem build_sl_problem(const SimConfig& cfg) {
  KernelSymbol L = kernel_from_spec(cfg.L_kernel);
  if (L.role != KernelRole::L || L.exploratory || !L.integration_allowed) {
    throw ConfigError("kernel '" + L.name + "' is not admissible as the Stuart-Landau coupling");
  }
  return SlProblem{cfg.grid, std::move(L), forcing_from_spec(cfg.forcing, cfg.grid), cfg.epsilon, cfg.sl_twist};
}

ComplexField rhs_stuart_landau(const ComplexField& z, const SlProblem& p) {
  if (!(z.grid == p.grid)) throw ContractError("rhs_stuart_landau: grid mismatch");
  ComplexSpectrum zh = forward(z);
  const ComplexVec lin = linear_symbol(p);
  for (std::size_t k = 0; k < lin.size(); ++k) zh.coeffs[k] *= lin[k] - cplx(0.0, 1.0);
  ComplexField out = inverse(zh);
  const double e2 = p.epsilon * p.epsilon;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const cplx zk = z.values[k];
    out.values[k] += cplx(0.0, 1.0 + e2 * p.forcing.field.values[k]) * zk + (1.0 - std::norm(zk)) * zk;
  }
  require_finite(out.values, 0.0);
  return out;
}

SlStepper::SlStepper(const SlProblem& p, double dt)
    : p_(p),
      plans_(plans_for(p.grid)),
      nv_(p.grid),
      na_(p.grid),
      nb_(p.grid),
      nc_(p.grid),
      a_(p.grid),
      b_(p.grid),
      cst_(p.grid) {
  c_ = etdrk4_coefficients(linear_symbol(p), dt);
  const double e2 = p.epsilon * p.epsilon;
  shift_.assign(p.grid.size(), 0.0);
  for (std::size_t k = 0; k < shift_.size(); ++k) shift_[k] = e2 * p.forcing.field.values[k];
  work_.assign(p.grid.size(), cplx{});
}

void SlStepper::nonlinear_term(const ComplexSpectrum& v, ComplexSpectrum& out) {
  const std::size_t n = p_.grid.size();
  plans_->c2c_backward(v.coeffs.data(), work_.data());
  for (std::size_t k = 0; k < n; ++k) {
    const cplx z = work_[k];
    work_[k] = cplx(1.0 - std::norm(z), shift_[k]) * z;
  }
  plans_->c2c_forward(work_.data(), out.coeffs.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (cplx& c : out.coeffs) c *= scale;
  dealias_inplace(out);
}

void SlStepper::step(ComplexSpectrum& v) {
  const std::size_t n = p_.grid.size();
  nonlinear_term(v, nv_);
  for (std::size_t k = 0; k < n; ++k) a_.coeffs[k] = c_.e2[k] * v.coeffs[k] + c_.q[k] * nv_.coeffs[k];
  nonlinear_term(a_, na_);
  for (std::size_t k = 0; k < n; ++k) b_.coeffs[k] = c_.e2[k] * v.coeffs[k] + c_.q[k] * na_.coeffs[k];
  nonlinear_term(b_, nb_);
  for (std::size_t k = 0; k < n; ++k) {
    cst_.coeffs[k] = c_.e2[k] * a_.coeffs[k] + c_.q[k] * (2.0 * nb_.coeffs[k] - nv_.coeffs[k]);
  }
  nonlinear_term(cst_, nc_);
  for (std::size_t k = 0; k < n; ++k) {
    v.coeffs[k] = c_.e[k] * v.coeffs[k] + nv_.coeffs[k] * c_.f1[k] +
                  2.0 * (na_.coeffs[k] + nb_.coeffs[k]) * c_.f2[k] + nc_.coeffs[k] * c_.f3[k];
  }
}

double SlRun::max_amplitude_deviation(double t_from) const {
  double m = 0.0;
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (times[n] >= t_from) m = std::max(m, amplitude_deviation[n]);
  }
  return m;
}

SlRun run_stuart_landau(const SimConfig& cfg, const std::optional<ComplexField>& initial) {
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  const SlProblem p = build_sl_problem(cfg);
  const Grid2D& g = cfg.grid;

  ComplexField z(g);
  if (initial) {
    if (!(initial->grid == g)) throw ContractError("run_stuart_landau: initial field grid mismatch");
    z = *initial;
  } else {
    std::fill(z.values.begin(), z.values.end(), cplx(1.0, 0.0));
  }

  SlRun run;
  run.probes = cfg.probe_points();
  for (const auto& [i, j] : run.probes) {
    if (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) throw ConfigError("probe outside the grid");
  }
  run.slow_phase.assign(run.probes.size(), {});
  std::vector<double> last_arg(run.probes.size(), 0.0);
  std::vector<double> unwrapped(run.probes.size(), 0.0);

  auto record = [&](const ComplexField& f, double t) {
    run.times.push_back(t);
    double dev = 0.0;
    for (const cplx& c : f.values) dev = std::max(dev, std::abs(std::abs(c) - 1.0));
    run.amplitude_deviation.push_back(dev);
    for (std::size_t q = 0; q < run.probes.size(); ++q) {
      const auto [i, j] = run.probes[q];
      const double a = std::arg(f.at(i, j));
      if (run.slow_phase[q].empty()) {
        unwrapped[q] = a;
      } else {
        double d = a - last_arg[q];
        d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
        unwrapped[q] += d;
      }
      last_arg[q] = a;
      run.slow_phase[q].push_back(unwrapped[q] - t);
    }
  };

  record(z, 0.0);
  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  if (steps > 0) {
    SlStepper stepper(p, cfg.dt);
    ComplexSpectrum v = forward(z);
    const auto plans = plans_for(g);
    ComplexField zr(g);
    for (int n = 1; n <= steps; ++n) {
      stepper.step(v);
      plans->c2c_backward(v.coeffs.data(), zr.values.data());
      const double t = n * cfg.dt;
      require_finite(zr.values, t);
      record(zr, t);
    }
    z = zr;
  }
  run.final_z = z;
  return run;
}

}  // namespace nleik
