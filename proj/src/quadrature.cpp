#include "nleik/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace nleik {

namespace {

using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr int kMaxIntervals = 2000;

struct Piece {
  double a, b, value, error, l1;
  bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk_piece(const std::function<double(double)>& f, double a, double b) {
  Piece p{a, b, 0.0, 0.0, 0.0};
  p.value = Gk::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
  return p;
}

// Global adaptive subdivision: split the worst interval until the summed error
// meets max(rel_tol * L1, abs_tol) or the interval budget runs out.
QuadResult adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol) {
  std::priority_queue<Piece> heap;
  heap.push(gk_piece(f, a, b));
  double value = heap.top().value, error = heap.top().error, l1 = heap.top().l1;
  while (error > std::max(rel_tol * l1, abs_tol) && static_cast<int>(heap.size()) < kMaxIntervals) {
    const Piece w = heap.top();
    heap.pop();
    const double m = 0.5 * (w.a + w.b);
    if (!(m > w.a && m < w.b)) {
      heap.push(w);
      break;
    }
    const Piece lo = gk_piece(f, w.a, m), hi = gk_piece(f, m, w.b);
    value += lo.value + hi.value - w.value;
    error += lo.error + hi.error - w.error;
    l1 += lo.l1 + hi.l1 - w.l1;
    heap.push(lo);
    heap.push(hi);
  }
  return {value, error};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol) {
  QuadResult r;
  if (!(abs_tol > 0.0)) {
    double l1 = 0.0;
    r.value = Gk::integrate(f, a, b, 20, rel_tol, &r.error, &l1);
    return r;
  }
  if (std::isinf(b)) {
    // x = a + t / (1 - t) maps [0, 1) onto [a, inf)
    auto g = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double s = 1.0 - t;
      return f(a + t / s) / (s * s);
    };
    return adaptive(g, 0.0, 1.0, rel_tol, abs_tol);
  }
  return adaptive(f, a, b, rel_tol, abs_tol);
}

QuadResult polar_mean_integral(const std::function<double(double, double)>& g, double r_max, int n_theta,
                               double rel_tol) {
  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  // ring sums of g and |g|; integrating g + |g| >= 0 and |g| keeps the
  // tolerance relative to the absolute mass, so cancelling integrals converge
  auto ring = [&](double r, bool with_signed) {
    if (r == 0.0) return 0.0;
    double s = 0.0;
    for (int k = 0; k < n_theta; ++k) {
      const double v = g(r, (k + 0.5) * dtheta);
      s += with_signed ? v + std::abs(v) : std::abs(v);
    }
    return s / n_theta * r;
  };
  const QuadResult both = integrate([&](double r) { return ring(r, true); }, 0.0, r_max, rel_tol);
  const QuadResult abs = integrate([&](double r) { return ring(r, false); }, 0.0, r_max, rel_tol);
  return {both.value - abs.value, both.error + abs.error};
}

}  // namespace nleik
