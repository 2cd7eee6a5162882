#include "nleik/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "nleik/errors.hpp"
#include "nleik/special.hpp"

namespace nleik {

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t b, std::size_t e) {
  const double n = static_cast<double>(e - b);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  Line l;
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double ss = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    const double d = y[i] - (l.intercept + l.slope * x[i]);
    ss += d * d;
  }
  l.rms = std::sqrt(ss / n);
  return l;
}

// Least squares via modified Gram-Schmidt; columns are overwritten.
std::vector<double> least_squares(std::vector<std::vector<double>> cols, std::vector<double> y) {
  const std::size_t m = cols.size();
  std::vector<std::vector<double>> R(m, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) d += cols[j][i] * cols[k][i];
      R[j][k] = d;
      for (std::size_t i = 0; i < y.size(); ++i) cols[k][i] -= d * cols[j][i];
    }
    double nrm = 0.0;
    for (double v : cols[k]) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw NumericalError("least_squares: rank-deficient design");
    R[k][k] = nrm;
    for (double& v : cols[k]) v /= nrm;
  }
  std::vector<double> qty(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double d = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) d += cols[k][i] * y[i];
    qty[k] = d;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= d * cols[k][i];
  }
  std::vector<double> x(m, 0.0);
  for (std::size_t k = m; k-- > 0;) {
    double s = qty[k];
    for (std::size_t j = k + 1; j < m; ++j) s -= R[k][j] * x[j];
    x[k] = s / R[k][k];
  }
  return x;
}

// Trigonometric interpolant of a real periodic field at arbitrary points.
class Interpolant {
 public:
  explicit Interpolant(const ScalarField& f) : grid_(f.grid), spec_(forward(f)) {
    const Grid2D& g = grid_;
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.half_nx(); ++i) {
        if (i == g.nx() / 2 || j == g.ny() / 2) {
          spec_.at(i, j) = cplx{};
        } else if (i > 0) {
          spec_.at(i, j) *= 2.0;
        }
      }
    }
    ex_.resize(g.half_nx());
    ey_.resize(g.ny());
  }

  double operator()(double x, double y) {
    const Grid2D& g = grid_;
    const double dx = x + 0.5 * g.lx();
    const double dy = y + 0.5 * g.ly();
    for (int i = 0; i < g.half_nx(); ++i) ex_[i] = std::polar(1.0, g.kx(i) * dx);
    for (int j = 0; j < g.ny(); ++j) ey_[j] = std::polar(1.0, g.ky(j) * dy);
    cplx s{};
    for (int j = 0; j < g.ny(); ++j) {
      const cplx* row = &spec_.coeffs[static_cast<std::size_t>(j) * g.half_nx()];
      cplx acc{};
      for (int i = 0; i < g.half_nx(); ++i) acc += row[i] * ex_[i];
      s += acc * ey_[j];
    }
    return s.real();
  }

 private:
  Grid2D grid_;
  SpectralField spec_;
  std::vector<cplx> ex_, ey_;
};

// Catmull-Rom on the periodic grid, separable over a 4 x 4 stencil.
class CubicInterpolant {
 public:
  explicit CubicInterpolant(const ScalarField& f) : f_(f) {}

  double operator()(double x, double y) const {
    const Grid2D& g = f_.grid;
    const double u = (x + 0.5 * g.lx()) / g.dx();
    const double v = (y + 0.5 * g.ly()) / g.dy();
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    const auto wx = weights(u - i0), wy = weights(v - j0);
    double s = 0.0;
    for (int b = 0; b < 4; ++b) {
      const int j = wrap(j0 - 1 + b, g.ny());
      double row = 0.0;
      for (int a = 0; a < 4; ++a) row += wx[a] * f_.at(wrap(i0 - 1 + a, g.nx()), j);
      s += wy[b] * row;
    }
    return s;
  }

 private:
  static int wrap(int i, int n) { return ((i % n) + n) % n; }
  static std::array<double, 4> weights(double t) {
    const double t2 = t * t, t3 = t2 * t;
    return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2)};
  }

  const ScalarField& f_;
};

}  // namespace

FrequencyFit measure_frequency(const std::vector<double>& t, const std::vector<double>& phi, double window_fraction) {
  if (t.size() != phi.size()) throw ContractError("measure_frequency: series lengths differ");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw ContractError("measure_frequency: window fraction must lie in (0, 1]");
  }
  if (t.empty()) throw ContractError("measure_frequency: empty series");
  const double t_from = t.back() - window_fraction * (t.back() - t.front());
  std::size_t b = 0;
  while (b < t.size() && t[b] < t_from) ++b;
  const std::size_t e = t.size();
  if (e - b < 10) {
    std::ostringstream os;
    os << "measure_frequency: " << e - b << " samples in the window, need at least 10";
    throw ContractError(os.str());
  }
  FrequencyFit fit;
  const Line l = fit_line(t, phi, b, e);
  fit.omega = -l.slope;
  fit.intercept = l.intercept;
  fit.residual = l.rms;
  fit.samples = e - b;
  const std::size_t mid = b + (e - b) / 2;
  fit.slope_first_half = fit_line(t, phi, b, mid).slope;
  fit.slope_second_half = fit_line(t, phi, mid, e).slope;
  const double scale = std::max(std::abs(fit.slope_first_half), std::abs(fit.slope_second_half));
  bool monotone = true;
  for (std::size_t i = b + 1; i < e; ++i) {
    const double d = phi[i] - phi[i - 1];
    if (d * l.slope < 0.0) monotone = false;
  }
  fit.transient_warning =
      !monotone || (scale > 1e-14 && std::abs(fit.slope_first_half - fit.slope_second_half) > 0.02 * scale);
  return fit;
}

std::vector<double> RadialProfile::real_mode0() const {
  std::vector<double> out(radii.size());
  for (std::size_t b = 0; b < radii.size(); ++b) out[b] = mode(0, b).real();
  return out;
}

std::size_t RadialProfile::nearest_bin(double r) const {
  if (radii.empty()) throw ContractError("RadialProfile: empty profile");
  std::size_t best = 0;
  for (std::size_t b = 1; b < radii.size(); ++b) {
    if (std::abs(radii[b] - r) < std::abs(radii[best] - r)) best = b;
  }
  return best;
}

RadialProfile polar_decompose(const ScalarField& f, std::pair<int, int> center, int n_max, int nbins, double r_max,
                              PolarInterpolation method) {
  const Grid2D& g = f.grid;
  if (nbins < 8) throw ContractError("polar_decompose: nbins must be at least 8");
  if (n_max < 0) throw ContractError("polar_decompose: n_max must be non-negative");
  const auto [ci, cj] = center;
  if (ci < 0 || cj < 0 || ci >= g.nx() || cj >= g.ny()) throw ContractError("polar_decompose: center off grid");
  if (!(r_max > 0.0)) r_max = 0.4 * std::min(g.lx(), g.ly());

  RadialProfile p;
  p.center = center;
  p.n_max = n_max;
  p.half_width = 0.5 * std::min(g.lx(), g.ly());
  p.modes.assign(2 * n_max + 1, std::vector<std::complex<double>>(nbins));
  p.radii.resize(nbins);
  p.samples.resize(nbins);
  p.valid.assign(nbins, true);

  std::optional<Interpolant> spectral;
  std::optional<CubicInterpolant> cubic;
  if (method == PolarInterpolation::spectral) {
    spectral.emplace(f);
  } else {
    cubic.emplace(f);
  }
  auto interp = [&](double x, double y) { return spectral ? (*spectral)(x, y) : (*cubic)(x, y); };
  const double x0 = g.x(ci), y0 = g.y(cj);
  const double h = std::min(g.dx(), g.dy());
  for (int b = 0; b < nbins; ++b) {
    const double r = (b + 0.5) * r_max / nbins;
    int nt = static_cast<int>(std::ceil(2.2 * r / h)) + 2 * n_max;
    // multiples of 4 make quarter turns of the grid permute the samples
    nt = std::max({64, 8 * n_max, 4 * ((nt + 3) / 4)});
    p.radii[b] = r;
    p.samples[b] = nt;
    std::vector<double> vals(nt);
    for (int m = 0; m < nt; ++m) {
      const double th = 2.0 * std::numbers::pi * m / nt;
      vals[m] = interp(x0 + r * std::cos(th), y0 + r * std::sin(th));
    }
    for (int n = -n_max; n <= n_max; ++n) {
      std::complex<double> s{};
      for (int m = 0; m < nt; ++m) s += vals[m] * std::polar(1.0, -2.0 * std::numbers::pi * n * m / nt);
      p.modes[n + n_max][b] = s / static_cast<double>(nt);
    }
    bool finite = true;
    for (double v : vals) finite = finite && std::isfinite(v);
    p.valid[b] = finite;
  }
  return p;
}

RadialProfile polar_decompose(const ScalarField& f, int n_max, int nbins, double r_max, PolarInterpolation method) {
  return polar_decompose(f, {f.grid.nx() / 2, f.grid.ny() / 2}, n_max, nbins, r_max, method);
}

double profile_energy(const RadialProfile& p) {
  if (p.radii.size() < 2) return 0.0;
  const double dr = p.radii[1] - p.radii[0];
  double e = 0.0;
  for (std::size_t b = 0; b < p.radii.size(); ++b) {
    if (!p.valid[b]) continue;
    for (int n = -p.n_max; n <= p.n_max; ++n) e += std::norm(p.mode(n, b)) * p.radii[b] * dr;
  }
  return 2.0 * std::numbers::pi * e;
}

Anisotropy anisotropy(const RadialProfile& p, std::size_t bin, double floor) {
  if (bin >= p.radii.size() || !p.valid[bin]) throw ContractError("anisotropy: invalid bin");
  const double f0 = std::norm(p.mode(0, bin));
  double rest = 0.0;
  for (int n = -p.n_max; n <= p.n_max; ++n) {
    if (n != 0) rest += std::norm(p.mode(n, bin));
  }
  if (std::sqrt(f0) <= floor) return {0.0, false};
  return {rest / f0, true};
}

Anisotropy anisotropy_at(const RadialProfile& p, double r, double floor) {
  return anisotropy(p, p.nearest_bin(r), floor);
}

WavenumberFit measure_wavenumber(const std::vector<double>& r, const std::vector<double>& phi0, double lambda_hint,
                                 double r_lo, double r_hi, double ridge_radius) {
  if (r.size() != phi0.size() || r.empty()) throw ContractError("measure_wavenumber: bad profile");
  if (!(lambda_hint > 0.0)) throw ContractError("measure_wavenumber: lambda hint must be positive");
  if (!(r_lo > 0.0)) r_lo = 3.0 / lambda_hint;
  if (!(r_hi > 0.0)) r_hi = r.back();
  if (r_lo < 2.0 / lambda_hint * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "measure_wavenumber: window start " << r_lo << " lies inside the core (2/lambda = " << 2.0 / lambda_hint
       << ")";
    throw ContractError(os.str());
  }
  if (r_hi > ridge_radius) {
    std::ostringstream os;
    os << "measure_wavenumber: window end " << r_hi << " reaches the boundary-ridge region (r > " << ridge_radius
       << ")";
    throw NumericalError(os.str());
  }
  std::vector<std::vector<double>> cols(3);
  std::vector<double> y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo || r[i] > r_hi) continue;
    cols[0].push_back(r[i]);
    cols[1].push_back(std::log(r[i]));
    cols[2].push_back(1.0);
    y.push_back(phi0[i]);
  }
  if (y.size() < 4) {
    std::ostringstream os;
    os << "measure_wavenumber: only " << y.size() << " samples in [" << r_lo << ", " << r_hi << "]";
    throw ContractError(os.str());
  }
  const auto c = least_squares(cols, y);
  WavenumberFit fit{c[0], c[1], c[2], 0.0, r_lo, r_hi};
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < r_lo || r[i] > r_hi) continue;
    const double d = phi0[i] - (c[0] * r[i] + c[1] * std::log(r[i]) + c[2]);
    ss += d * d;
    ++n;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

WavenumberFit measure_wavenumber(const RadialProfile& p, double lambda_hint, double r_lo, double r_hi) {
  return measure_wavenumber(p.radii, p.real_mode0(), lambda_hint, r_lo, r_hi, 0.9 * p.half_width);
}

std::vector<double> core_residual(const std::vector<double>& r, const std::vector<double>& phi0, double lambda) {
  if (!(lambda > 0.0)) throw ContractError("core_residual: lambda must be positive");
  if (r.size() != phi0.size()) throw ContractError("core_residual: size mismatch");
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = phi0[i] + log_bessel_k0(lambda * r[i]);
  return out;
}

DecayFit decay_fit(const std::vector<double>& r, const std::vector<double>& psi, const DecayOptions& opt) {
  if (r.size() != psi.size() || r.empty()) throw ContractError("decay_fit: bad profile");
  const double lo = opt.r_lo > 0.0 ? opt.r_lo : r.front();
  const double hi = opt.r_hi > 0.0 ? opt.r_hi : r.back();
  std::vector<double> wr, wp;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] >= lo && r[i] <= hi && r[i] > 0.0) {
      wr.push_back(r[i]);
      wp.push_back(psi[i]);
    }
  }
  if (wr.size() < 3) throw ContractError("decay_fit: fewer than 3 samples in the window");
  DecayFit fit;
  fit.r_lo = lo;
  fit.r_hi = hi;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    if (wp[i] * wp[i - 1] < 0.0) fit.sign_changes = true;
  }

  if (opt.fit_offset) {
    // psi = offset + C r^-delta: exhaustive delta grid, linear solve for the rest
    double best_ss = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 4000; ++k) {
      const double d = 1e-3 * k;
      double s1 = 0.0, sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < wr.size(); ++i) {
        const double x = std::pow(wr[i], -d);
        s1 += 1.0;
        sx += x;
        sxx += x * x;
        sy += wp[i];
        sxy += x * wp[i];
      }
      const double det = s1 * sxx - sx * sx;
      if (det <= 0.0) continue;
      const double c = (s1 * sxy - sx * sy) / det;
      const double off = (sy - c * sx) / s1;
      double ss = 0.0;
      for (std::size_t i = 0; i < wr.size(); ++i) {
        const double e = wp[i] - off - c * std::pow(wr[i], -d);
        ss += e * e;
      }
      if (ss < best_ss) {
        best_ss = ss;
        fit.delta = d;
        fit.C = c;
        fit.offset = off;
      }
    }
    fit.points = wr.size();
    fit.residual = std::sqrt(best_ss / wr.size());
  } else {
    std::vector<std::size_t> use;
    if (opt.envelope) {
      for (std::size_t i = 1; i + 1 < wp.size(); ++i) {
        const double a = std::abs(wp[i]);
        if (a >= std::abs(wp[i - 1]) && a >= std::abs(wp[i + 1]) && a > 0.0) use.push_back(i);
      }
      if (use.size() < 3) use.clear();
    }
    if (use.empty()) {
      for (std::size_t i = 0; i < wp.size(); ++i) {
        if (wp[i] != 0.0) use.push_back(i);
      }
    }
    if (use.size() < 2) throw NumericalError("decay_fit: profile vanishes on the window");
    std::vector<double> lx, ly;
    for (std::size_t i : use) {
      lx.push_back(std::log(wr[i]));
      ly.push_back(std::log(std::abs(wp[i])));
    }
    const Line l = fit_line(lx, ly, 0, lx.size());
    fit.delta = -l.slope;
    fit.C = std::exp(l.intercept);
    fit.residual = l.rms;
    fit.points = use.size();
  }

  for (double gamma : opt.gammas) {
    double s = 0.0;
    for (std::size_t i = 1; i < wr.size(); ++i) {
      const double f0 = wp[i - 1] - fit.offset, f1 = wp[i] - fit.offset;
      const double a = f0 * f0 * std::pow(1.0 + wr[i - 1] * wr[i - 1], gamma) * wr[i - 1];
      const double b = f1 * f1 * std::pow(1.0 + wr[i] * wr[i], gamma) * wr[i];
      s += 0.5 * (a + b) * (wr[i] - wr[i - 1]);
    }
    fit.weighted_norms.emplace_back(gamma, std::sqrt(2.0 * std::numbers::pi * s));
  }
  return fit;
}

double weighted_norm(const ScalarField& f, double gamma) {
  const Grid2D& g = f.grid;
  double s = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double r2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
      const double v = f.at(i, j);
      s += v * v * std::pow(1.0 + r2, gamma);
    }
  }
  return std::sqrt(s * g.cell_area());
}

}  // namespace nleik
