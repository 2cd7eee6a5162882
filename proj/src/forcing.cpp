#include "nleik/forcing.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/ellint_2.hpp>

#include "nleik/errors.hpp"
#include "nleik/quadrature.hpp"

namespace nleik {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

ScalarField sample_closed(const Grid2D& grid, const std::function<double(double, double)>& g) {
  return ScalarField::from_function(grid, [&](double x, double y) {
    const double r = std::hypot(x, y);
    const double theta = std::atan2(y, x);
    return g(r, theta);
  });
}

}  // namespace

std::vector<std::string> forcing_names() { return {"g1", "g2", "gaussian", "dipole-test"}; }

ForcingSpec forcing_catalog(const std::string& name, const std::vector<double>& params, const Grid2D& grid) {
  ForcingSpec f{name, params, ScalarField(grid), {}, {}, {}, 0.0, 0.0};
  auto expect = [&](std::size_t n) {
    if (params.size() != n) {
      std::ostringstream os;
      os << "forcing '" << name << "' expects " << n << " parameter(s), got " << params.size();
      throw ConfigError(os.str());
    }
  };
  if (name == "g1") {
    expect(0);
    // (1 + 3x^2 + y^2)^(-3/2): elliptical core, r^-3 tail
    f.closed = [](double r, double t) {
      const double c = std::cos(t), s = std::sin(t);
      return std::pow(1.0 + 3.0 * r * r * c * c + r * r * s * s, -1.5);
    };
    // mean of (a + b cos u)^(-3/2) with a = 1 + 2r^2, b = r^2:
    // (2/pi) E(k) / ((a - b) sqrt(a + b)), k^2 = 2b / (a + b)
    f.average = [](double r) {
      const double a = 1.0 + 2.0 * r * r, b = r * r;
      const double k = std::sqrt(2.0 * b / (a + b));
      return 2.0 / std::numbers::pi * boost::math::ellint_2(k) / ((a - b) * std::sqrt(a + b));
    };
    f.sigma = 2.4;
  } else if (name == "g2") {
    expect(0);
    // (1 + cos 4theta) / (1 + r)^3; the origin takes the angular mean
    f.closed = [](double r, double t) {
      const double ang = r == 0.0 ? 1.0 : 1.0 + std::cos(4.0 * t);
      return ang / std::pow(1.0 + r, 3);
    };
    f.average = [](double r) { return std::pow(1.0 + r, -3); };
    f.sigma = 2.4;
  } else if (name == "gaussian") {
    expect(1);
    const double a = params[0];
    f.radial = [a](double r) { return a * std::exp(-r * r); };
    f.closed = [a](double r, double) { return a * std::exp(-r * r); };
    f.sigma = 10.0;
  } else if (name == "dipole-test") {
    expect(0);
    f.closed = [](double r, double t) { return r == 0.0 ? 0.0 : std::cos(t) * std::pow(1.0 + r, -6); };
    f.average = [](double) { return 0.0; };
    f.sigma = 4.5;
  } else {
    std::string names;
    for (const auto& n : forcing_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown forcing '" + name + "'; catalog: " + names);
  }
  f.field = sample_closed(grid, f.closed);
  f.mass = mass(f).quadrature;
  return f;
}

ForcingSpec forcing_from_spec(const std::string& spec, const Grid2D& grid) {
  const std::string s = trim(spec);
  const auto open = s.find('(');
  if (open == std::string::npos) return forcing_catalog(s, {}, grid);
  const auto close = s.rfind(')');
  if (close == std::string::npos || close < open) throw ConfigError("malformed forcing spec '" + spec + "'");
  std::vector<double> params;
  std::stringstream body(s.substr(open + 1, close - open - 1));
  std::string item;
  while (std::getline(body, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      params.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad forcing parameter '" + item + "' in '" + spec + "'");
    }
  }
  return forcing_catalog(trim(s.substr(0, open)), params, grid);
}

std::string forcing_spec_string(const ForcingSpec& f) {
  if (f.params.empty()) return f.name;
  std::ostringstream os;
  os.precision(17);
  os << f.name << "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) os << (i ? ", " : "") << f.params[i];
  os << ")";
  return os.str();
}

ForcingSpec forcing_from_field(const std::string& name, const ScalarField& field, double sigma) {
  ForcingSpec f{name, {}, field, {}, {}, {}, sigma, 0.0};
  if (!field.all_finite()) throw ContractError("forcing_from_field: non-finite samples");
  f.mass = grid_mass(field);
  return f;
}

double grid_mass(const ScalarField& g) {
  double s = 0.0;
  for (double v : g.values) s += v;
  return s * g.grid.cell_area() / (2.0 * std::numbers::pi);
}

MassEstimate mass(const ForcingSpec& spec) {
  if (spec.sigma <= 1.0) {
    std::ostringstream os;
    os << "mass: forcing '" << spec.name << "' declares sigma = " << spec.sigma << " <= 1, not integrable";
    throw NumericalError(os.str());
  }
  MassEstimate m;
  m.grid_sum = grid_mass(spec.field);
  if (!spec.has_closed_form()) {
    m.quadrature = std::numeric_limits<double>::quiet_NaN();
    m.truncation_bound = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  if (spec.is_radial()) {
    auto g = spec.radial;
    m.quadrature = integrate([&](double r) { return g(r) * r; }, 0.0, kInf).value;
  } else {
    m.quadrature = polar_mean_integral(spec.closed, kInf).value;
  }
  const double r_in = 0.5 * std::min(spec.field.grid.lx(), spec.field.grid.ly());
  auto closed = spec.closed;
  const double tail = integrate(
                          [&](double r) {
                            constexpr int n = 64;
                            double s = 0.0;
                            for (int k = 0; k < n; ++k) s += std::abs(closed(r, (k + 0.5) * 2.0 * std::numbers::pi / n));
                            return s / n * r;
                          },
                          r_in, kInf)
                          .value;
  m.truncation_bound = tail;
  return m;
}

std::function<double(double)> angular_average(const ForcingSpec& spec, int n_theta) {
  if (spec.is_radial()) return spec.radial;
  if (spec.average) return spec.average;
  if (!spec.has_closed_form()) throw ContractError("angular_average: forcing '" + spec.name + "' has no closed form");
  auto g = spec.closed;
  return [g, n_theta](double r) {
    double s = 0.0;
    for (int k = 0; k < n_theta; ++k) s += g(r, (k + 0.5) * 2.0 * std::numbers::pi / n_theta);
    return s / n_theta;
  };
}

int max_angular_order(double sigma) {
  if (sigma <= 1.0) return -1;
  return static_cast<int>(std::ceil(sigma)) - 2;
}

}  // namespace nleik
