#include "nleik/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nleik/errors.hpp"

namespace nleik {

namespace {

void require_positive(double z, const char* who) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    std::ostringstream os;
    os << who << ": argument must be positive and finite (got " << z << ")";
    throw ContractError(os.str());
  }
}

// Ascending series (A&S 9.6.13 / 9.6.11, n = 0, 1).
void series_k01(double z, double& k0, double& k1) {
  const double q = 0.25 * z * z;
  const double lg = std::log(0.5 * z);
  double term0 = 1.0;  // q^k / (k!)^2
  double term1 = 1.0;  // q^k / (k! (k+1)!)
  double harmonic = 0.0;
  double i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double psi_k1 = -kEulerGamma + harmonic;              // psi(k+1)
    const double psi_k2 = psi_k1 + 1.0 / (k + 1.0);             // psi(k+2)
    i0 += term0;
    i1 += term1;
    s0 += psi_k1 * term0;
    s1 += (psi_k1 + psi_k2) * term1;
    if (term0 < 1e-18 * std::abs(i0) && k > 2) break;
    harmonic += 1.0 / (k + 1.0);
    term0 *= q / ((k + 1.0) * (k + 1.0));
    term1 *= q / ((k + 1.0) * (k + 2.0));
  }
  k0 = -lg * i0 + s0;
  i1 *= 0.5 * z;
  k1 = 1.0 / z + lg * i1 - 0.25 * z * s1;
}

// Steed's CF2 (Temme's form) for nu = 0; returns exp(z) K0, exp(z) K1.
void cf2_scaled_k01(double z, double& k0s, double& k1s) {
  constexpr double eps = 1e-17;
  double b = 2.0 * (1.0 + z);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h *= a1;
  k0s = std::sqrt(std::numbers::pi / (2.0 * z)) / s;
  k1s = k0s * (z + 0.5 - h) / z;
}

double smooth_bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double smooth_bump_derivative(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

BesselEval bessel_k01(double z) {
  require_positive(z, "bessel_k01");
  BesselEval e;
  e.z = z;
  if (z <= 2.0) {
    e.method = BesselMethod::series;
    series_k01(z, e.k0, e.k1);
    e.k0_scaled = e.k0 * std::exp(z);
    e.k1_scaled = e.k1 * std::exp(z);
  } else {
    e.method = BesselMethod::continued_fraction;
    cf2_scaled_k01(z, e.k0_scaled, e.k1_scaled);
    const double ez = std::exp(-z);
    e.k0 = e.k0_scaled * ez;
    e.k1 = e.k1_scaled * ez;
  }
  return e;
}

double bessel_k0(double z) { return bessel_k01(z).k0; }
double bessel_k1(double z) { return bessel_k01(z).k1; }

double log_bessel_k0(double z) {
  const BesselEval e = bessel_k01(z);
  return std::log(e.k0_scaled) - z;
}

double outer_wavenumber(double xi) {
  require_positive(xi, "outer_wavenumber");
  const BesselEval e = bessel_k01(xi);
  return e.k1_scaled / e.k0_scaled;
}

double cutoff(double x) {
  const double a = smooth_bump(x - 1.0);
  const double b = smooth_bump(2.0 - x);
  return a / (a + b);
}

double cutoff_derivative(double x) {
  const double a = smooth_bump(x - 1.0);
  const double b = smooth_bump(2.0 - x);
  const double da = smooth_bump_derivative(x - 1.0);
  const double db = -smooth_bump_derivative(2.0 - x);
  const double den = a + b;
  return (da * den - a * (da + db)) / (den * den);
}

double core_ansatz(double lambda, double r) {
  require_positive(lambda, "core_ansatz");
  if (r < 0.0) throw ContractError("core_ansatz: r must be non-negative");
  const double z = lambda * r;
  const double chi = cutoff(z);
  if (chi == 0.0) return 0.0;
  return -chi * log_bessel_k0(z);
}

double core_ansatz_derivative(double lambda, double r) {
  require_positive(lambda, "core_ansatz_derivative");
  if (r < 0.0) throw ContractError("core_ansatz_derivative: r must be non-negative");
  const double z = lambda * r;
  const double chi = cutoff(z);
  if (chi == 0.0) return 0.0;
  const BesselEval e = bessel_k01(z);
  const double lnk0 = std::log(e.k0_scaled) - z;
  return -lambda * cutoff_derivative(z) * lnk0 + chi * lambda * e.k1_scaled / e.k0_scaled;
}

double core_ansatz_residual(double lambda, double r_lo, double r_hi, int samples) {
  require_positive(lambda, "core_ansatz_residual");
  if (!(r_hi > r_lo) || !(r_lo > 0.0)) throw ContractError("core_ansatz_residual: need 0 < r_lo < r_hi");
  auto psi = [lambda](double r) { return -log_bessel_k0(lambda * r); };
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    const double r = r_lo + (r_hi - r_lo) * n / (samples - 1.0);
    const double h = 0.02 / lambda;
    const double fm2 = psi(r - 2 * h), fm1 = psi(r - h), f0 = psi(r), fp1 = psi(r + h), fp2 = psi(r + 2 * h);
    const double d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    const double d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    const double res = d2 + d1 / r - d1 * d1 + lambda * lambda;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace nleik
