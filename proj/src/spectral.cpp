#include "nleik/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include "nleik/errors.hpp"

namespace nleik {

namespace {

// The FFTW planner is not re-entrant; only plan creation/destruction is guarded.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw ContractError(std::string(what) + ": grid mismatch");
}

}  // namespace

Grid2D::Grid2D(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
    std::ostringstream os;
    os << "Grid2D: nx, ny must be even and >= 8 (got " << nx << ", " << ny << ")";
    throw ContractError(os.str());
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw ContractError("Grid2D: lx, ly must be positive and finite");
  }
}

double Grid2D::kx(int i) const { return 2.0 * std::numbers::pi * wrap(i, nx_) / lx_; }
double Grid2D::ky(int j) const { return 2.0 * std::numbers::pi * wrap(j, ny_) / ly_; }

double Grid2D::xi(int i, int j) const {
  const double a = kx(i);
  const double b = ky(j);
  return a * a + b * b;
}

ScalarField::ScalarField(const Grid2D& g) : grid(g), values(g.size(), 0.0) {}

ScalarField::ScalarField(const Grid2D& g, RealVec v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw ContractError("ScalarField: value count does not match grid");
}

ScalarField ScalarField::from_function(const Grid2D& g, const std::function<double(double, double)>& f) {
  ScalarField out(g);
  for (int j = 0; j < g.ny(); ++j) {
    const double y = g.y(j);
    for (int i = 0; i < g.nx(); ++i) out.at(i, j) = f(g.x(i), y);
  }
  return out;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

SpectralField::SpectralField(const Grid2D& g) : grid(g), coeffs(g.half_size(), cplx{}) {}

cplx SpectralField::coefficient(int fx, int fy) const {
  const int nx = grid.nx();
  const int ny = grid.ny();
  if (std::abs(fx) > nx / 2 || std::abs(fy) > ny / 2) throw ContractError("coefficient: frequency out of range");
  auto idx = [](int f, int n) { return f < 0 ? f + n : f; };
  if (fx >= 0) {
    return at(fx == nx / 2 ? nx / 2 : fx, idx(fy, ny) % ny);
  }
  if (fx == -nx / 2) return at(nx / 2, idx(fy, ny) % ny);
  return std::conj(at(-fx, idx(-fy, ny) % ny));
}

double SpectralField::energy() const {
  const int hx = grid.half_nx();
  const int nx = grid.nx();
  double e = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < hx; ++i) {
      const double w = (i == 0 || i == nx / 2) ? 1.0 : 2.0;
      e += w * std::norm(at(i, j));
    }
  }
  return e;
}

ComplexField::ComplexField(const Grid2D& g) : grid(g), values(g.size(), cplx{}) {}
ComplexSpectrum::ComplexSpectrum(const Grid2D& g) : grid(g), coeffs(g.size(), cplx{}) {}

struct FftPlans::Impl {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan c2c_f = nullptr;
  fftw_plan c2c_b = nullptr;
};

FftPlans::FftPlans(const Grid2D& g) : impl_(std::make_unique<Impl>()) {
  RealVec real(g.size());
  ComplexVec half(g.half_size());
  ComplexVec full_in(g.size());
  ComplexVec full_out(g.size());
  auto* h = reinterpret_cast<fftw_complex*>(half.data());
  auto* fi = reinterpret_cast<fftw_complex*>(full_in.data());
  auto* fo = reinterpret_cast<fftw_complex*>(full_out.data());
  std::lock_guard lock(planner_mutex());
  impl_->r2c = fftw_plan_dft_r2c_2d(g.ny(), g.nx(), real.data(), h, FFTW_ESTIMATE);
  impl_->c2r = fftw_plan_dft_c2r_2d(g.ny(), g.nx(), h, real.data(), FFTW_ESTIMATE);
  impl_->c2c_f = fftw_plan_dft_2d(g.ny(), g.nx(), fi, fo, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->c2c_b = fftw_plan_dft_2d(g.ny(), g.nx(), fi, fo, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!impl_->r2c || !impl_->c2r || !impl_->c2c_f || !impl_->c2c_b) {
    throw NumericalError("FftPlans: FFTW planning failed");
  }
}

FftPlans::~FftPlans() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(impl_->r2c);
  fftw_destroy_plan(impl_->c2r);
  fftw_destroy_plan(impl_->c2c_f);
  fftw_destroy_plan(impl_->c2c_b);
}

void FftPlans::r2c(const double* in, cplx* out) const {
  fftw_execute_dft_r2c(impl_->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void FftPlans::c2r(cplx* in, double* out) const {
  fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(in), out);
}

void FftPlans::c2c_forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(impl_->c2c_f, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void FftPlans::c2c_backward(const cplx* in, cplx* out) const {
  fftw_execute_dft(impl_->c2c_b, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

std::shared_ptr<const FftPlans> plans_for(const Grid2D& g) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const FftPlans>> cache;
  std::lock_guard lock(cache_mutex);
  auto key = std::make_pair(g.nx(), g.ny());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto plans = std::make_shared<const FftPlans>(g);
  cache.emplace(key, plans);
  return plans;
}

SpectralField forward(const ScalarField& field) {
  if (field.values.size() != field.grid.size()) throw ContractError("forward: value count does not match grid");
  SpectralField out(field.grid);
  plans_for(field.grid)->r2c(field.values.data(), out.coeffs.data());
  const double scale = 1.0 / static_cast<double>(field.grid.size());
  for (auto& c : out.coeffs) c *= scale;
  return out;
}

ScalarField inverse(const SpectralField& spec) {
  if (spec.coeffs.size() != spec.grid.half_size()) throw ContractError("inverse: coefficient count does not match grid");
  ComplexVec work = spec.coeffs;
  ScalarField out(spec.grid);
  plans_for(spec.grid)->c2r(work.data(), out.values.data());
  return out;
}

ComplexSpectrum forward(const ComplexField& field) {
  if (field.values.size() != field.grid.size()) throw ContractError("forward: value count does not match grid");
  ComplexSpectrum out(field.grid);
  plans_for(field.grid)->c2c_forward(field.values.data(), out.coeffs.data());
  const double scale = 1.0 / static_cast<double>(field.grid.size());
  for (auto& c : out.coeffs) c *= scale;
  return out;
}

ComplexField inverse(const ComplexSpectrum& spec) {
  if (spec.coeffs.size() != spec.grid.size()) throw ContractError("inverse: coefficient count does not match grid");
  ComplexField out(spec.grid);
  plans_for(spec.grid)->c2c_backward(spec.coeffs.data(), out.values.data());
  return out;
}

RealVec sample_symbol(const Grid2D& g, const Symbol& s) {
  RealVec out(g.half_size());
  const int hx = g.half_nx();
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < hx; ++i) {
      const double xi = g.xi(i, j);
      const double v = s(xi);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "symbol is not finite at xi = " << xi;
        throw ContractError(os.str());
      }
      out[static_cast<std::size_t>(j) * hx + i] = v;
    }
  }
  return out;
}

void apply_symbol_inplace(SpectralField& spec, const RealVec& sampled) {
  if (sampled.size() != spec.coeffs.size()) throw ContractError("apply_symbol: sampled symbol size mismatch");
  for (std::size_t k = 0; k < sampled.size(); ++k) spec.coeffs[k] *= sampled[k];
}

ScalarField apply_symbol(const ScalarField& field, const Symbol& s) {
  const RealVec sampled = sample_symbol(field.grid, s);
  SpectralField spec = forward(field);
  apply_symbol_inplace(spec, sampled);
  return inverse(spec);
}

void differentiate_x(SpectralField& spec) {
  const Grid2D& g = spec.grid;
  const int hx = g.half_nx();
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < hx; ++i) {
      const double k = (i == g.nx() / 2) ? 0.0 : g.kx(i);
      spec.at(i, j) *= cplx(0.0, k);
    }
  }
}

void differentiate_y(SpectralField& spec) {
  const Grid2D& g = spec.grid;
  const int hx = g.half_nx();
  for (int j = 0; j < g.ny(); ++j) {
    const double k = (j == g.ny() / 2) ? 0.0 : g.ky(j);
    for (int i = 0; i < hx; ++i) spec.at(i, j) *= cplx(0.0, k);
  }
}

std::pair<ScalarField, ScalarField> gradient(const ScalarField& field) {
  SpectralField sx = forward(field);
  SpectralField sy = sx;
  differentiate_x(sx);
  differentiate_y(sy);
  return {inverse(sx), inverse(sy)};
}

bool is_dealiased(int i, int j, const Grid2D& g) {
  return 3 * std::abs(Grid2D::wrap(i, g.nx())) > g.nx() || 3 * std::abs(Grid2D::wrap(j, g.ny())) > g.ny();
}

void dealias_inplace(SpectralField& spec) {
  const Grid2D& g = spec.grid;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.half_nx(); ++i) {
      if (is_dealiased(i, j, g)) spec.at(i, j) = cplx{};
    }
  }
}

void dealias_inplace(ComplexSpectrum& spec) {
  const Grid2D& g = spec.grid;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (is_dealiased(i, j, g)) spec.at(i, j) = cplx{};
    }
  }
}

SpectralField dealias(SpectralField spec) {
  dealias_inplace(spec);
  return spec;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a.grid, b.grid, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

ScalarField random_band_limited(const Grid2D& g, std::uint64_t seed, int kmax, double amplitude, double taper) {
  if (kmax < 1 || 3 * kmax > g.nx() || 3 * kmax > g.ny()) {
    throw ContractError("random_band_limited: need 1 <= kmax <= n/3");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField spec(g);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.half_nx(); ++i) {
      const double a = normal(rng);
      const double b = normal(rng);
      const int fy = Grid2D::wrap(j, g.ny());
      if (i > kmax || std::abs(fy) > kmax || (i == 0 && fy <= 0)) continue;
      const double w = taper > 0.0 ? std::exp(-(i * i + fy * fy) / (2.0 * taper * taper)) : 1.0;
      spec.at(i, j) = w * cplx(a, b);
    }
  }
  for (int j = 1; j < g.ny(); ++j) {
    if (Grid2D::wrap(j, g.ny()) < 0) spec.at(0, j) = std::conj(spec.at(0, g.ny() - j));
  }
  ScalarField f = inverse(spec);
  const double m = f.max_abs();
  if (m > 0.0) {
    for (double& v : f.values) v *= amplitude / m;
  }
  return f;
}

}  // namespace nleik
