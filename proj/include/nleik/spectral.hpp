#pragma once

// Periodic 2-D grid, real/complex fields and their Fourier transforms.
//
// Layout: samples are row-major with x fastest, value(i, j) = values[j * nx + i],
// physical position x_i = -lx/2 + i*lx/nx, y_j = -ly/2 + j*ly/ny, so the grid
// point (nx/2, ny/2) sits at the origin. Frequency index i maps to the signed
// integer wrap(i) = i for i < n/2 and i - n otherwise (Nyquist is -n/2).
//
// Transforms are normalized so that the (0,0) coefficient is the spatial mean:
//   c(k) = (1/N) sum_n f(n) exp(-2 pi i k.n / N),   f(n) = sum_k c(k) exp(2 pi i k.n / N),
// with n the grid index (phases are relative to the corner sample).
// Real fields keep the half spectrum (ny rows of nx/2+1 columns).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <new>
#include <utility>
#include <vector>

namespace nleik {

using cplx = std::complex<double>;

template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + alignment - 1) / alignment) * alignment;
    void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using RealVec = std::vector<double, AlignedAllocator<double>>;
using ComplexVec = std::vector<cplx, AlignedAllocator<cplx>>;

class Grid2D {
 public:
  /// Throws ContractError unless nx, ny are even and >= 8 and lx, ly > 0.
  Grid2D(int nx, int ny, double lx, double ly);

  static Grid2D square(int n, double l) { return Grid2D(n, n, l, l); }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double dx() const { return lx_ / nx_; }
  double dy() const { return ly_ / ny_; }
  double cell_area() const { return dx() * dy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

  /// Columns of the half spectrum of a real field.
  int half_nx() const { return nx_ / 2 + 1; }
  std::size_t half_size() const { return static_cast<std::size_t>(half_nx()) * ny_; }

  static int wrap(int index, int n) { return index < n / 2 ? index : index - n; }

  double x(int i) const { return -0.5 * lx_ + i * dx(); }
  double y(int j) const { return -0.5 * ly_ + j * dy(); }

  double kx(int i) const;
  double ky(int j) const;
  /// xi = |k|^2 for frequency indices (i, j); valid for full and half layouts.
  double xi(int i, int j) const;

  bool operator==(const Grid2D& other) const = default;

 private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
};

struct ScalarField {
  explicit ScalarField(const Grid2D& g);
  ScalarField(const Grid2D& g, RealVec v);

  /// Samples f(x, y) at every grid point.
  static ScalarField from_function(const Grid2D& g, const std::function<double(double, double)>& f);

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }

  double max_abs() const;
  double mean() const;
  bool all_finite() const;

  Grid2D grid;
  RealVec values;
};

/// Half spectrum of a real field; conjugate symmetry is implied by the layout.
struct SpectralField {
  explicit SpectralField(const Grid2D& g);

  cplx& at(int i, int j) { return coeffs[static_cast<std::size_t>(j) * grid.half_nx() + i]; }
  cplx at(int i, int j) const { return coeffs[static_cast<std::size_t>(j) * grid.half_nx() + i]; }

  /// Coefficient for signed frequencies (fx, fy) with |fx| <= nx/2, |fy| <= ny/2.
  cplx coefficient(int fx, int fy) const;

  /// sum over the full spectrum of |c|^2 (equals the mean of f^2).
  double energy() const;

  Grid2D grid;
  ComplexVec coeffs;
};

struct ComplexField {
  explicit ComplexField(const Grid2D& g);

  cplx& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }
  cplx at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }

  Grid2D grid;
  ComplexVec values;
};

/// Full spectrum of a complex field, ny rows of nx columns.
struct ComplexSpectrum {
  explicit ComplexSpectrum(const Grid2D& g);

  cplx& at(int i, int j) { return coeffs[static_cast<std::size_t>(j) * grid.nx() + i]; }
  cplx at(int i, int j) const { return coeffs[static_cast<std::size_t>(j) * grid.nx() + i]; }

  Grid2D grid;
  ComplexVec coeffs;
};

/// FFTW plans for one grid shape. Obtain via plans_for(); execution is thread safe.
class FftPlans {
 public:
  explicit FftPlans(const Grid2D& g);
  ~FftPlans();
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  /// Unnormalized real-to-half-complex transform. Arrays must be 64-byte aligned.
  void r2c(const double* in, cplx* out) const;
  /// Unnormalized inverse; `in` is overwritten.
  void c2r(cplx* in, double* out) const;
  void c2c_forward(const cplx* in, cplx* out) const;
  void c2c_backward(const cplx* in, cplx* out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::shared_ptr<const FftPlans> plans_for(const Grid2D& g);

/// Throws ContractError when the value count does not match the grid.
SpectralField forward(const ScalarField& field);
ScalarField inverse(const SpectralField& spec);
ComplexSpectrum forward(const ComplexField& field);
ComplexField inverse(const ComplexSpectrum& spec);

using Symbol = std::function<double(double)>;

/// s(xi) sampled on the half spectrum. Throws ContractError naming the first
/// xi where s is not finite.
RealVec sample_symbol(const Grid2D& g, const Symbol& s);

ScalarField apply_symbol(const ScalarField& field, const Symbol& s);
void apply_symbol_inplace(SpectralField& spec, const RealVec& sampled);

std::pair<ScalarField, ScalarField> gradient(const ScalarField& field);
/// Spectral derivative d/dx in place (Nyquist column zeroed).
void differentiate_x(SpectralField& spec);
void differentiate_y(SpectralField& spec);

/// 2/3 rule: zero every coefficient with 3|fx| > nx or 3|fy| > ny.
SpectralField dealias(SpectralField spec);
void dealias_inplace(SpectralField& spec);
void dealias_inplace(ComplexSpectrum& spec);
bool is_dealiased(int i, int j, const Grid2D& g);

double max_abs_diff(const ScalarField& a, const ScalarField& b);

/// Zero-mean real field with seeded Gaussian coefficients on |fx|, |fy| <= kmax,
/// scaled to max |f| = amplitude. Deterministic for a given seed. A positive
/// `taper` weights index (fx, fy) by exp(-(fx^2 + fy^2) / (2 taper^2)), which
/// keeps e^{i f} inside the band; the random draws do not depend on it.
ScalarField random_band_limited(const Grid2D& g, std::uint64_t seed, int kmax, double amplitude, double taper = 0.0);

}  // namespace nleik
