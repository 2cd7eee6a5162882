#include "nleik/kernels.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "nleik/errors.hpp"

namespace nleik {

namespace {

std::string catalog_listing() {
  std::string s;
  for (const auto& n : kernel_names()) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

void require_params(const std::string& name, const std::vector<double>& params, std::size_t n) {
  if (params.size() != n) {
    std::ostringstream os;
    os << "kernel '" << name << "' expects " << n << " parameter(s), got " << params.size();
    throw ConfigError(os.str());
  }
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> kernel_names() {
  return {"laplacian", "rational", "ks", "identity", "bessel-smoother", "gaussian", "reduction"};
}

KernelSymbol kernel_catalog(const std::string& name, const std::vector<double>& params) {
  KernelSymbol k;
  k.name = name;
  k.params = params;
  if (name == "laplacian") {
    require_params(name, params, 0);
    k.role = KernelRole::L;
    k.eval = [](double xi) { return -xi; };
  } else if (name == "rational") {
    require_params(name, params, 0);
    k.role = KernelRole::L;
    k.eval = [](double xi) { return -xi / (1.0 + xi); };
  } else if (name == "ks") {
    require_params(name, params, 0);
    k.role = KernelRole::L;
    k.eval = [](double xi) { return xi - xi * xi; };
    k.exploratory = true;
  } else if (name == "identity") {
    require_params(name, params, 0);
    k.role = KernelRole::J;
    k.multiplicity = 0;
    k.eval = [](double) { return 1.0; };
  } else if (name == "bessel-smoother") {
    require_params(name, params, 0);
    k.role = KernelRole::J;
    k.multiplicity = 0;
    k.eval = [](double xi) { return 1.0 / (1.0 + xi); };
  } else if (name == "gaussian") {
    require_params(name, params, 1);
    const double sigma = params[0];
    if (!(sigma > 0.0)) throw ConfigError("kernel 'gaussian' needs sigma > 0");
    k.role = KernelRole::J;
    k.multiplicity = 0;
    k.eval = [sigma](double xi) { return std::exp(-0.5 * xi * sigma * sigma); };
  } else if (name == "reduction") {
    require_params(name, params, 2);
    const double b1 = params[0];
    const double b2 = params[1];
    if (b1 < 0.0 || b2 < 0.0) throw ConfigError("kernel 'reduction' needs b1, b2 >= 0");
    k.role = KernelRole::J;
    k.multiplicity = 0;
    // Grows like sqrt(xi): not exponentially localized, so never used for stepping.
    k.integration_allowed = false;
    k.eval = [b1, b2](double xi) { return std::sqrt(b1 + 3.0 * b2 * xi); };
  } else {
    throw ConfigError("unknown kernel '" + name + "'; catalog: " + catalog_listing());
  }
  return k;
}

KernelSymbol kernel_from_spec(const std::string& spec) {
  const std::string s = trim(spec);
  const auto open = s.find('(');
  if (open == std::string::npos) return kernel_catalog(s);
  const auto close = s.rfind(')');
  if (close == std::string::npos || close < open) throw ConfigError("malformed kernel spec '" + spec + "'");
  const std::string name = trim(s.substr(0, open));
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
      throw ConfigError("bad kernel parameter '" + item + "' in '" + spec + "'");
    }
  }
  return kernel_catalog(name, params);
}

std::string kernel_spec_string(const KernelSymbol& k) {
  if (k.params.empty()) return k.name;
  std::ostringstream os;
  os.precision(17);
  os << k.name << "(";
  for (std::size_t i = 0; i < k.params.size(); ++i) os << (i ? ", " : "") << k.params[i];
  os << ")";
  return os.str();
}

bool HypothesisReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck* HypothesisReport::find(const std::string& check) const {
  for (const auto& c : checks)
    if (c.name == check) return &c;
  return nullptr;
}

HypothesisReport validate_hypotheses(const KernelSymbol& sym) {
  HypothesisReport rep;
  rep.kernel = sym.name;
  const double band = sym.invert_threshold;
  const double s0 = sym(0.0);

  // Bounded on the band, and the sample set reused for the zero search.
  constexpr int kSamples = 4000;
  std::vector<double> xs(kSamples + 1);
  std::vector<double> vs(kSamples + 1);
  double max_abs = std::abs(s0);
  bool finite = std::isfinite(s0);
  for (int n = 0; n <= kSamples; ++n) {
    // geometric spacing resolves the neighbourhood of the origin
    const double x = band * std::pow(1e-6, 1.0 - static_cast<double>(n) / kSamples);
    xs[n] = x;
    vs[n] = sym(x);
    finite = finite && std::isfinite(vs[n]);
    max_abs = std::max(max_abs, std::abs(vs[n]));
  }

  {
    // log-log slope near the origin estimates the order of the zero
    const double a = 1e-4, b = 2e-4;
    const double fa = std::abs(sym(a)), fb = std::abs(sym(b));
    if (fa > 0.0 && fb > 0.0) {
      rep.estimated_multiplicity = static_cast<int>(std::lround(std::log(fb / fa) / std::log(b / a)));
    }
  }

  if (sym.role == KernelRole::L) {
    rep.checks.push_back({"value_at_zero", std::abs(s0) <= 1e-14, s0, "L(0) must vanish"});

    const double h = 1e-4;
    const double slope = (-3.0 * s0 + 4.0 * sym(h) - sym(2.0 * h)) / (2.0 * h);
    rep.checks.push_back({"slope_at_zero", std::abs(slope + 1.0) <= 1e-6, slope, "L'(0) = -1 (simple zero, normalized)"});

    for (int n = 0; n < kSamples; ++n) {
      const double fa = vs[n], fb = vs[n + 1];
      if (fa == 0.0) {
        rep.extra_zeros.push_back(xs[n]);
      } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
        boost::uintmax_t iters = 200;
        auto tol = [](double l, double r) { return std::abs(r - l) <= 1e-14 * std::max(1.0, std::abs(l)); };
        auto root = boost::math::tools::bisect([&](double x) { return sym(x); }, xs[n], xs[n + 1], tol, iters);
        rep.extra_zeros.push_back(0.5 * (root.first + root.second));
      }
    }
    if (vs[kSamples] == 0.0) rep.extra_zeros.push_back(xs[kSamples]);
    const double first = rep.extra_zeros.empty() ? 0.0 : rep.extra_zeros.front();
    rep.checks.push_back({"no_extra_zeros", rep.extra_zeros.empty(), first, "no zero of L on (0, xi_m]"});
  } else {
    rep.checks.push_back({"unit_mass", std::abs(s0 - 1.0) <= 1e-12, s0, "J(0) = 1"});
  }
  rep.checks.push_back({"bounded", finite && max_abs < 1e12, max_abs, "sup |symbol| on sampled band"});
  return rep;
}

KernelSymbol precondition_symbol(const KernelSymbol& L) {
  if (L.role != KernelRole::L) throw ContractError("precondition_symbol: '" + L.name + "' is not an L-type kernel");
  const HypothesisReport rep = validate_hypotheses(L);
  for (const char* name : {"value_at_zero", "slope_at_zero", "no_extra_zeros"}) {
    const HypothesisCheck* c = rep.find(name);
    if (c == nullptr || !c->passed) {
      std::ostringstream os;
      os << "precondition_symbol: kernel '" << L.name << "' fails " << name;
      if (c != nullptr) os << " (witness " << c->witness << ")";
      os << "; preconditioner would be unbounded";
      throw NumericalError(os.str());
    }
  }
  KernelSymbol m;
  m.name = "precond[" + L.name + "]";
  m.role = KernelRole::J;
  m.multiplicity = 0;
  m.invert_threshold = L.invert_threshold;
  m.strip_half_width = L.strip_half_width;
  auto l = L.eval;
  m.eval = [l](double xi) { return xi == 0.0 ? 1.0 : -xi / l(xi); };
  return m;
}

}  // namespace nleik
