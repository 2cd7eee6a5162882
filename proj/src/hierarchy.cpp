#include "nleik/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nleik/errors.hpp"

namespace nleik {

namespace {

// (d/dx)^px (d/dy)^py; Nyquist modes dropped along axes with odd order.
ScalarField derivative(const SpectralField& spec, int px, int py) {
  const Grid2D& g = spec.grid;
  SpectralField d = spec;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.half_nx(); ++i) {
      const bool drop = (px % 2 == 1 && i == g.nx() / 2) || (py % 2 == 1 && j == g.ny() / 2);
      if (drop) {
        d.at(i, j) = cplx{};
        continue;
      }
      cplx m = std::pow(cplx(0.0, g.kx(i)), px) * std::pow(cplx(0.0, g.ky(j)), py);
      d.at(i, j) *= m;
    }
  }
  return inverse(d);
}

double relative_max_error(const ScalarField& a, const ScalarField& b) {
  const double scale = std::max(b.max_abs(), 1e-300);
  return max_abs_diff(a, b) / scale;
}

}  // namespace

GammaSigma gamma_sigma_spectral(const ScalarField& phi, int k) {
  if (k < 1) throw ContractError("gamma_sigma_spectral: k must be >= 1");
  const Grid2D& g = phi.grid;
  ComplexField e(g);
  for (std::size_t n = 0; n < g.size(); ++n) e.values[n] = std::polar(1.0, phi.values[n]);
  ComplexSpectrum eh = forward(e);

  double total = 0.0, high = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double en = std::norm(eh.at(i, j));
      total += en;
      if (is_dealiased(i, j, g)) high += en;
      eh.at(i, j) *= std::pow(-g.xi(i, j), k);
    }
  }
  const ComplexField lap = inverse(eh);
  GammaSigma out{ScalarField(g), ScalarField(g), total > 0.0 ? high / total : 0.0, false};
  out.aliasing_warning = out.aliasing_fraction > 1e-10;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const cplx v = std::conj(e.values[n]) * lap.values[n];
    out.gamma.values[n] = v.imag();
    out.sigma.values[n] = v.real();
  }
  return out;
}

GammaSigma gamma_sigma_closed(const ScalarField& phi, int k) {
  if (k != 1 && k != 2) throw ContractError("gamma_sigma_closed: closed forms exist for k = 1, 2 only");
  const Grid2D& g = phi.grid;
  const SpectralField s = forward(phi);
  const ScalarField px = derivative(s, 1, 0), py = derivative(s, 0, 1);
  const ScalarField pxx = derivative(s, 2, 0), pxy = derivative(s, 1, 1), pyy = derivative(s, 0, 2);
  GammaSigma out{ScalarField(g), ScalarField(g), 0.0, false};
  if (k == 1) {
    for (std::size_t n = 0; n < g.size(); ++n) {
      out.gamma.values[n] = pxx.values[n] + pyy.values[n];
      out.sigma.values[n] = -(px.values[n] * px.values[n] + py.values[n] * py.values[n]);
    }
    return out;
  }
  const ScalarField pxxxx = derivative(s, 4, 0), pxxyy = derivative(s, 2, 2), pyyyy = derivative(s, 0, 4);
  const ScalarField pxxx = derivative(s, 3, 0), pxyy = derivative(s, 1, 2);
  const ScalarField pxxy = derivative(s, 2, 1), pyyy = derivative(s, 0, 3);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double ux = px.values[n], uy = py.values[n];
    const double uxx = pxx.values[n], uxy = pxy.values[n], uyy = pyy.values[n];
    const double grad2 = ux * ux + uy * uy;
    const double lap = uxx + uyy;
    const double bilap = pxxxx.values[n] + 2.0 * pxxyy.values[n] + pyyyy.values[n];
    const double hess_form = ux * (uxx * ux + uxy * uy) + uy * (uxy * ux + uyy * uy);
    const double grad_lap_x = pxxx.values[n] + pxyy.values[n];
    const double grad_lap_y = pxxy.values[n] + pyyy.values[n];
    const double hess2 = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
    out.gamma.values[n] = bilap - 2.0 * grad2 * lap - 4.0 * hess_form;
    out.sigma.values[n] = grad2 * grad2 - 4.0 * (ux * grad_lap_x + uy * grad_lap_y) - 2.0 * hess2 - lap * lap;
  }
  return out;
}

double dispersion(double b1, double b2, double k2) { return b1 * k2 - b2 * k2 * k2; }

ReductionCheck reduction_identity_check(const ScalarField& phi, double b1, double b2) {
  const Grid2D& g = phi.grid;
  const SpectralField s = forward(phi);
  const ScalarField px = derivative(s, 1, 0), py = derivative(s, 0, 1);
  const ScalarField pxx = derivative(s, 2, 0), pxy = derivative(s, 1, 1), pyy = derivative(s, 0, 2);
  auto jsym = [b1, b2](double xi) { return std::sqrt(b1 + 3.0 * b2 * xi); };
  const ScalarField jx = apply_symbol(px, jsym), jy = apply_symbol(py, jsym);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double grad2 = px.values[n] * px.values[n] + py.values[n] * py.values[n];
    const double hess2 = pxx.values[n] * pxx.values[n] + 2.0 * pxy.values[n] * pxy.values[n] +
                         pyy.values[n] * pyy.values[n];
    const double lap = pxx.values[n] + pyy.values[n];
    lhs += b1 * grad2 + b2 * (2.0 * hess2 + lap * lap);
    rhs += jx.values[n] * jx.values[n] + jy.values[n] * jy.values[n];
  }
  lhs *= g.cell_area();
  rhs *= g.cell_area();
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return {lhs, rhs, scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0};
}

double plane_wave_rate(double qx, double qy, const KernelSymbol& J) {
  const double j0 = J(0.0);
  return j0 * j0 * (qx * qx + qy * qy);
}

double HierarchyReport::max_error() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max({m, r.gamma_error, r.sigma_error});
  return m;
}

double HierarchyReport::max_reduction_error() const {
  double m = 0.0;
  for (const auto& r : reductions) m = std::max(m, r.relative_error);
  return m;
}

HierarchyReport hierarchy_report(const Grid2D& grid, std::uint64_t seed, int random_fields, double b1, double b2) {
  HierarchyReport rep;
  rep.b1 = b1;
  rep.b2 = b2;
  const double kx1 = 2.0 * std::numbers::pi / grid.lx();
  const double ky1 = 2.0 * std::numbers::pi / grid.ly();
  std::vector<std::pair<std::string, ScalarField>> fields;
  fields.emplace_back("single-mode", ScalarField::from_function(grid, [&](double x, double) {
                        return std::sin(kx1 * x);
                      }));
  fields.emplace_back("two-mode", ScalarField::from_function(grid, [&](double x, double y) {
                        return 0.5 * std::sin(kx1 * x) + 0.4 * std::cos(kx1 * x + 2.0 * ky1 * y);
                      }));
  // Delta^2 amplifies whatever of e^{i phi} aliases by |k|^4, so the random
  // fields taper their spectrum inside the cutoff; a flat spectrum at unit
  // amplitude leaves 1e-6 of the energy of e^{i phi} past the 2/3 band.
  const int kmax = std::min(grid.nx(), grid.ny()) / 8;
  const double taper = kmax / 5.0;
  for (int n = 0; n < random_fields; ++n) {
    std::ostringstream name;
    name << "random-" << n;
    fields.emplace_back(name.str(), random_band_limited(grid, seed + static_cast<std::uint64_t>(n), kmax, 1.0, taper));
  }
  for (const auto& [name, phi] : fields) {
    for (int k = 1; k <= 2; ++k) {
      const GammaSigma spec = gamma_sigma_spectral(phi, k);
      const GammaSigma closed = gamma_sigma_closed(phi, k);
      rep.rows.push_back({name, k, relative_max_error(spec.gamma, closed.gamma),
                          relative_max_error(spec.sigma, closed.sigma), spec.aliasing_warning});
    }
  }
  for (int n = 0; n < random_fields; ++n) {
    rep.reductions.push_back(reduction_identity_check(fields[2 + n].second, b1, b2));
  }
  for (int i = 0; i <= 20; ++i) {
    const double k2 = 0.1 * i;
    rep.dispersion_table.emplace_back(k2, dispersion(b1, b2, k2));
  }
  return rep;
}

}  // namespace nleik
