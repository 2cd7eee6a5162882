#include "nleik/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nleik/errors.hpp"
#include "nleik/io.hpp"

namespace nleik {

namespace {

constexpr int kContourPoints = 32;

void require_finite_spectrum(const SpectralField& v, double t) {
  for (const cplx& c : v.coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      std::ostringstream os;
      os << "blow-up: non-finite spectral coefficient at t = " << t;
      throw NumericalError(os.str());
    }
  }
}

double parse_random_amplitude(const std::string& spec) {
  const auto open = spec.find('(');
  const auto close = spec.rfind(')');
  if (spec.rfind("random", 0) != 0 || open == std::string::npos || close == std::string::npos || close < open) {
    throw ConfigError("initial must be 'zero' or 'random(amplitude)', got '" + spec + "'");
  }
  try {
    return std::stod(spec.substr(open + 1, close - open - 1));
  } catch (const std::exception&) {
    throw ConfigError("bad amplitude in initial '" + spec + "'");
  }
}

}  // namespace

std::vector<std::pair<int, int>> SimConfig::probe_points() const {
  if (!probes.empty()) return probes;
  return {{grid.nx() / 2, grid.ny() / 2}};
}

double SimState::total_phase(int i, int j) const {
  return qx * phi.grid.x(i) + qy * phi.grid.y(j) + drift + phi.at(i, j);
}

EikonalProblem build_problem(const SimConfig& cfg) {
  KernelSymbol L = kernel_from_spec(cfg.L_kernel);
  KernelSymbol J = kernel_from_spec(cfg.J_kernel);
  if (L.role != KernelRole::L) throw ConfigError("kernel '" + L.name + "' cannot serve as L");
  if (J.role != KernelRole::J) throw ConfigError("kernel '" + J.name + "' cannot serve as J");
  for (const KernelSymbol* k : {&L, &J}) {
    if (k->exploratory || !k->integration_allowed) {
      throw ConfigError("kernel '" + k->name + "' is not admissible for time integration");
    }
  }
  ForcingSpec g = cfg.forcing_file.empty()
                      ? forcing_from_spec(cfg.forcing, cfg.grid)
                      : forcing_from_field(cfg.forcing_file, read_checkpoint(cfg.forcing_file).phi, 0.0);
  if (!(g.field.grid == cfg.grid)) throw ConfigError("forcing file grid does not match the simulation grid");
  return EikonalProblem{cfg.grid, std::move(L), std::move(J), std::move(g), cfg.epsilon, cfg.qx, cfg.qy,
                        cfg.dealias, cfg.nonlinear};
}

EtdCoefficients etdrk4_coefficients(std::span<const cplx> linear, double dt) {
  if (!(dt > 0.0)) throw ContractError("etdrk4_coefficients: dt must be positive");
  const std::size_t n = linear.size();
  EtdCoefficients c;
  for (ComplexVec* v : {&c.e, &c.e2, &c.q, &c.f1, &c.f2, &c.f3}) v->assign(n, cplx{});
  std::array<cplx, kContourPoints> roots;
  for (int m = 0; m < kContourPoints; ++m) {
    roots[m] = std::polar(1.0, std::numbers::pi * (m + 0.5) / (0.5 * kContourPoints));
  }
  for (std::size_t k = 0; k < n; ++k) {
    const cplx center = dt * linear[k];
    c.e[k] = std::exp(center);
    c.e2[k] = std::exp(0.5 * center);
    cplx q{}, f1{}, f2{}, f3{};
    for (const cplx& r : roots) {
      const cplx z = center + r;
      const cplx ez = std::exp(z);
      const cplx z3 = z * z * z;
      q += (std::exp(0.5 * z) - 1.0) / z;
      f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      f2 += (2.0 + z + ez * (z - 2.0)) / z3;
      f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    const double w = dt / kContourPoints;
    c.q[k] = w * q;
    c.f1[k] = w * f1;
    c.f2[k] = w * f2;
    c.f3[k] = w * f3;
  }
  return c;
}

EikonalStepper::EikonalStepper(const EikonalProblem& p, double dt)
    : p_(p),
      dt_(dt),
      plans_(plans_for(p.grid)),
      nv_(p.grid),
      na_(p.grid),
      nb_(p.grid),
      nc_(p.grid),
      a_(p.grid),
      b_(p.grid),
      cst_(p.grid) {
  if (!(dt > 0.0)) throw ContractError("EikonalStepper: dt must be positive");
  const Grid2D& g = p.grid;
  const std::size_t hs = g.half_size();
  const RealVec lsym = sample_symbol(g, p.L.eval);
  const RealVec jsym = sample_symbol(g, p.J.eval);
  ComplexVec lin(hs);
  for (std::size_t k = 0; k < hs; ++k) lin[k] = lsym[k];
  c_ = etdrk4_coefficients(lin, dt);

  dx_.assign(hs, cplx{});
  dy_.assign(hs, cplx{});
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.half_nx(); ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * g.half_nx() + i;
      if (p.dealias && is_dealiased(i, j, g)) continue;
      const double kx = (i == g.nx() / 2) ? 0.0 : g.kx(i);
      const double ky = (j == g.ny() / 2) ? 0.0 : g.ky(j);
      dx_[k] = cplx(0.0, kx * jsym[k]);
      dy_[k] = cplx(0.0, ky * jsym[k]);
    }
  }
  const double j0 = p.J(0.0);
  jq_x_ = j0 * p.qx;
  jq_y_ = j0 * p.qy;

  const SpectralField gh = forward(p.forcing.field);
  forcing_hat_ = gh.coeffs;
  has_nonlinear_ = p.nonlinear || p.epsilon != 0.0;
  work_.assign(hs, cplx{});
  wx_.assign(g.size(), 0.0);
  wy_.assign(g.size(), 0.0);
}

void EikonalStepper::nonlinear_term(const SpectralField& v, SpectralField& out) {
  const Grid2D& g = p_.grid;
  const std::size_t hs = g.half_size();
  if (!has_nonlinear_) {
    std::fill(out.coeffs.begin(), out.coeffs.end(), cplx{});
    return;
  }
  if (p_.nonlinear) {
    for (std::size_t k = 0; k < hs; ++k) work_[k] = dx_[k] * v.coeffs[k];
    plans_->c2r(work_.data(), wx_.data());
    for (std::size_t k = 0; k < hs; ++k) work_[k] = dy_[k] * v.coeffs[k];
    plans_->c2r(work_.data(), wy_.data());
    const std::size_t n = g.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double a = wx_[k] + jq_x_;
      const double b = wy_[k] + jq_y_;
      wx_[k] = -(a * a + b * b);
    }
    plans_->r2c(wx_.data(), out.coeffs.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (cplx& c : out.coeffs) c *= scale;
    if (p_.dealias) dealias_inplace(out);
  } else {
    std::fill(out.coeffs.begin(), out.coeffs.end(), cplx{});
  }
  if (p_.epsilon != 0.0) {
    for (std::size_t k = 0; k < hs; ++k) out.coeffs[k] += p_.epsilon * forcing_hat_[k];
  }
}

void EikonalStepper::step(SpectralField& v) {
  const std::size_t hs = p_.grid.half_size();
  if (!has_nonlinear_) {
    for (std::size_t k = 0; k < hs; ++k) v.coeffs[k] *= c_.e[k];
    return;
  }
  nonlinear_term(v, nv_);
  for (std::size_t k = 0; k < hs; ++k) a_.coeffs[k] = c_.e2[k] * v.coeffs[k] + c_.q[k] * nv_.coeffs[k];
  nonlinear_term(a_, na_);
  for (std::size_t k = 0; k < hs; ++k) b_.coeffs[k] = c_.e2[k] * v.coeffs[k] + c_.q[k] * na_.coeffs[k];
  nonlinear_term(b_, nb_);
  for (std::size_t k = 0; k < hs; ++k) {
    cst_.coeffs[k] = c_.e2[k] * a_.coeffs[k] + c_.q[k] * (2.0 * nb_.coeffs[k] - nv_.coeffs[k]);
  }
  nonlinear_term(cst_, nc_);
  for (std::size_t k = 0; k < hs; ++k) {
    v.coeffs[k] = c_.e[k] * v.coeffs[k] + nv_.coeffs[k] * c_.f1[k] +
                  2.0 * (na_.coeffs[k] + nb_.coeffs[k]) * c_.f2[k] + nc_.coeffs[k] * c_.f3[k];
  }
}

SimState make_state(const SpectralField& v, double t, double qx, double qy) {
  SpectralField periodic = v;
  const double drift = periodic.coeffs[0].real();
  periodic.coeffs[0] = cplx{};
  SimState s;
  s.t = t;
  s.phi = inverse(periodic);
  s.drift = drift;
  s.qx = qx;
  s.qy = qy;
  return s;
}

SpectralField state_spectrum(const SimState& s) {
  SpectralField v = forward(s.phi);
  v.coeffs[0] = cplx(s.drift + v.coeffs[0].real(), 0.0);
  return v;
}

EikonalRhs rhs_eikonal(const SimState& state, const EikonalProblem& p) {
  if (!state.phi.all_finite()) throw ContractError("rhs_eikonal: non-finite phase field");
  EikonalProblem local = p;
  local.qx = state.qx;
  local.qy = state.qy;
  EikonalStepper stepper(local, 1.0);
  const SpectralField v = state_spectrum(state);
  SpectralField n(p.grid);
  stepper.nonlinear_term(v, n);
  const RealVec lsym = sample_symbol(p.grid, p.L.eval);
  for (std::size_t k = 0; k < n.coeffs.size(); ++k) n.coeffs[k] += lsym[k] * v.coeffs[k];
  require_finite_spectrum(n, state.t);
  EikonalRhs out{ScalarField(p.grid), n.coeffs[0].real()};
  n.coeffs[0] = cplx{};
  out.periodic = inverse(n);
  return out;
}

ScalarField initial_phase(const SimConfig& cfg) {
  if (cfg.initial == "zero") return ScalarField(cfg.grid);
  const double amplitude = parse_random_amplitude(cfg.initial);
  return random_band_limited(cfg.grid, cfg.seed, std::max(1, std::min(cfg.grid.nx(), cfg.grid.ny()) / 8), amplitude);
}

namespace {

// Evaluates the real field at one grid point directly from the half spectrum.
class PointEvaluator {
 public:
  PointEvaluator(const Grid2D& g, int pi, int pj) : phase_(g.half_size()) {
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.half_nx(); ++i) {
        const double w = (i == 0 || i == g.nx() / 2) ? 1.0 : 2.0;
        const double arg = 2.0 * std::numbers::pi *
                           (static_cast<double>(i) * pi / g.nx() + static_cast<double>(j) * pj / g.ny());
        phase_[static_cast<std::size_t>(j) * g.half_nx() + i] = w * std::polar(1.0, arg);
      }
    }
  }
  double operator()(const SpectralField& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < phase_.size(); ++k) {
      s += v.coeffs[k].real() * phase_[k].real() - v.coeffs[k].imag() * phase_[k].imag();
    }
    return s;
  }

 private:
  ComplexVec phase_;
};

}  // namespace

Observables run_simulation(const SimConfig& cfg, const SnapshotSink& sink) {
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  const EikonalProblem problem = build_problem(cfg);
  const Grid2D& g = cfg.grid;

  Observables obs;
  obs.probes = cfg.probe_points();
  for (const auto& [i, j] : obs.probes) {
    if (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) {
      std::ostringstream os;
      os << "probe (" << i << ", " << j << ") lies outside the " << g.nx() << "x" << g.ny() << " grid";
      throw ConfigError(os.str());
    }
  }
  std::vector<PointEvaluator> evals;
  for (const auto& [i, j] : obs.probes) evals.emplace_back(g, i, j);
  obs.probe_series.assign(obs.probes.size(), {});

  SpectralField v = forward(initial_phase(cfg));
  auto record = [&](double t) {
    obs.times.push_back(t);
    for (std::size_t p = 0; p < evals.size(); ++p) {
      const auto [i, j] = obs.probes[p];
      obs.probe_series[p].push_back(evals[p](v) + cfg.qx * g.x(i) + cfg.qy * g.y(j));
    }
  };
  auto snapshot = [&](double t, int step) {
    SimState s = make_state(v, t, cfg.qx, cfg.qy);
    if (sink) {
      sink(s, step);
    } else {
      obs.snapshots.push_back(std::move(s));
    }
  };

  record(0.0);
  if (cfg.snapshot_stride > 0) snapshot(0.0, 0);
  const int steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  if (steps > 0) {
    EikonalStepper stepper(problem, cfg.dt);
    for (int n = 1; n <= steps; ++n) {
      stepper.step(v);
      const double t = n * cfg.dt;
      const cplx c0 = v.coeffs[0];
      if (!std::isfinite(c0.real()) || (n % 64 == 0)) require_finite_spectrum(v, t);
      record(t);
      if (cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0) snapshot(t, n);
    }
    require_finite_spectrum(v, steps * cfg.dt);
  }
  obs.steps = std::max(steps, 0);
  obs.final_state = make_state(v, obs.steps * cfg.dt, cfg.qx, cfg.qy);
  return obs;
}

}  // namespace nleik
