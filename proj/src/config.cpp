#include "nleik/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nleik/errors.hpp"
#include "nleik/forcing.hpp"

namespace nleik {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"grid", {"nx", "ny", "lx", "ly"}},
      {"kernels", {"L", "J"}},
      {"forcing", {"g", "file"}},
      {"run",
       {"model", "epsilon", "qx", "qy", "dt", "t_end", "snapshot_stride", "dealias", "nonlinear", "seed", "initial",
        "sl_twist"}},
      {"probes", {"points"}},
      {"analysis", {"eps", "simulate", "window", "n_max", "nbins", "image"}},
  };
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw ConfigError(os.str());
}

double to_double(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) fail(e.line, "'" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long to_int(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) fail(e.line, "'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  if (v == "true") return true;
  if (v == "false") return false;
  fail(e.line, "'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(Entry{item, e.line}, key));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ContractError("format_double: conversion failed");
  return std::string(buf, p);
}

std::vector<std::pair<int, int>> parse_probes(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw ConfigError("probe '" + item + "' must be 'i,j'");
    const std::string a = trim(item.substr(0, comma)), b = trim(item.substr(comma + 1));
    int i = 0, j = 0;
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), i);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), j);
    if (ra.ec != std::errc() || ra.ptr != a.data() + a.size() || rb.ec != std::errc() ||
        rb.ptr != b.data() + b.size() || a.empty() || b.empty()) {
      throw ConfigError("probe '" + item + "' must be two integers 'i,j'");
    }
    out.emplace_back(i, j);
  }
  return out;
}

RunConfig parse_config_string(const std::string& text, const ParseOptions& opt, std::vector<std::string>* warnings) {
  std::map<std::string, std::map<std::string, Entry>> entries;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (!schema().count(section)) fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    if (section.empty()) fail(line, "key '" + key + "' appears before any [section]");
    if (!schema().at(section).count(key)) fail(line, "unknown key '" + key + "' in [" + section + "]");
    if (entries[section].count(key)) fail(line, "duplicate key '" + key + "' in [" + section + "]");
    entries[section][key] = Entry{trim(s.substr(eq + 1)), line};
  }

  auto get = [&](const std::string& sec, const std::string& key) -> const Entry* {
    auto it = entries.find(sec);
    if (it == entries.end()) return nullptr;
    auto jt = it->second.find(key);
    return jt == it->second.end() ? nullptr : &jt->second;
  };

  RunConfig cfg;
  SimConfig& sim = cfg.sim;
  int nx = sim.grid.nx(), ny = sim.grid.ny();
  double lx = sim.grid.lx(), ly = sim.grid.ly();
  if (auto e = get("grid", "nx")) nx = static_cast<int>(to_int(*e, "nx"));
  if (auto e = get("grid", "ny")) ny = static_cast<int>(to_int(*e, "ny"));
  if (auto e = get("grid", "lx")) lx = to_double(*e, "lx");
  if (auto e = get("grid", "ly")) ly = to_double(*e, "ly");
  try {
    sim.grid = Grid2D(nx, ny, lx, ly);
  } catch (const ContractError& err) {
    throw ConfigError(std::string("[grid]: ") + err.what());
  }
  if (auto e = get("kernels", "L")) sim.L_kernel = e->value;
  if (auto e = get("kernels", "J")) sim.J_kernel = e->value;
  if (auto e = get("forcing", "g")) sim.forcing = e->value;
  if (auto e = get("forcing", "file")) sim.forcing_file = e->value;
  if (auto e = get("run", "model")) {
    if (e->value == "eikonal") {
      sim.model = Model::eikonal;
    } else if (e->value == "stuart-landau") {
      sim.model = Model::stuart_landau;
    } else {
      fail(e->line, "model must be 'eikonal' or 'stuart-landau', got '" + e->value + "'");
    }
  }
  if (auto e = get("run", "epsilon")) sim.epsilon = to_double(*e, "epsilon");
  if (auto e = get("run", "qx")) sim.qx = to_double(*e, "qx");
  if (auto e = get("run", "qy")) sim.qy = to_double(*e, "qy");
  if (auto e = get("run", "dt")) sim.dt = to_double(*e, "dt");
  if (auto e = get("run", "t_end")) sim.t_end = to_double(*e, "t_end");
  if (auto e = get("run", "snapshot_stride")) sim.snapshot_stride = static_cast<int>(to_int(*e, "snapshot_stride"));
  if (auto e = get("run", "dealias")) sim.dealias = to_bool(*e, "dealias");
  if (auto e = get("run", "nonlinear")) sim.nonlinear = to_bool(*e, "nonlinear");
  if (auto e = get("run", "seed")) {
    std::uint64_t s = 0;
    const auto r = std::from_chars(e->value.data(), e->value.data() + e->value.size(), s);
    if (e->value.empty() || r.ec != std::errc() || r.ptr != e->value.data() + e->value.size()) {
      fail(e->line, "'seed' expects an unsigned 64-bit integer, got '" + e->value + "'");
    }
    sim.seed = s;
  }
  if (auto e = get("run", "initial")) sim.initial = e->value;
  if (auto e = get("run", "sl_twist")) sim.sl_twist = to_double(*e, "sl_twist");
  if (auto e = get("probes", "points")) {
    try {
      sim.probes = parse_probes(e->value);
    } catch (const ConfigError& err) {
      fail(e->line, std::string("'points': ") + err.what());
    }
  }
  AnalysisConfig& an = cfg.analysis;
  if (auto e = get("analysis", "eps")) an.eps = to_list(*e, "eps");
  if (auto e = get("analysis", "simulate")) an.simulate = to_bool(*e, "simulate");
  if (auto e = get("analysis", "window")) an.window = to_double(*e, "window");
  if (auto e = get("analysis", "n_max")) an.n_max = static_cast<int>(to_int(*e, "n_max"));
  if (auto e = get("analysis", "nbins")) an.nbins = static_cast<int>(to_int(*e, "nbins"));
  if (auto e = get("analysis", "image")) an.image = e->value;

  // semantic checks
  if (!(sim.dt > 0.0)) throw ConfigError("[run] dt must be positive (got " + format_double(sim.dt) + ")");
  if (!(sim.t_end >= 0.0)) throw ConfigError("[run] t_end must be non-negative");
  if (sim.snapshot_stride < 0) throw ConfigError("[run] snapshot_stride must be non-negative");
  if (sim.initial != "zero" && sim.initial.rfind("random(", 0) != 0) {
    throw ConfigError("[run] initial must be 'zero' or 'random(amplitude)'");
  }
  for (const auto& [i, j] : sim.probes) {
    if (i < 0 || j < 0 || i >= sim.grid.nx() || j >= sim.grid.ny()) {
      throw ConfigError("[probes] point (" + std::to_string(i) + "," + std::to_string(j) + ") is off the grid");
    }
  }
  if (!(an.window > 0.0 && an.window <= 1.0)) throw ConfigError("[analysis] window must lie in (0, 1]");
  if (an.nbins < 8) throw ConfigError("[analysis] nbins must be at least 8");
  if (an.n_max < 0) throw ConfigError("[analysis] n_max must be non-negative");
  if (an.image != "P5" && an.image != "P2" && an.image != "none") {
    throw ConfigError("[analysis] image must be P5, P2 or none");
  }
  {
    const KernelSymbol L = kernel_from_spec(sim.L_kernel);
    const KernelSymbol J = kernel_from_spec(sim.J_kernel);
    if (L.role != KernelRole::L) throw ConfigError("[kernels] '" + L.name + "' is not an L-type kernel");
    if (J.role != KernelRole::J) throw ConfigError("[kernels] '" + J.name + "' is not a J-type kernel");
  }

  if (opt.check_mass && sim.forcing_file.empty()) {
    const ForcingSpec g = forcing_from_spec(sim.forcing, sim.grid);
    std::vector<double> all_eps = an.eps;
    all_eps.push_back(sim.epsilon);
    for (double eps : all_eps) {
      if (eps == 0.0 || eps * g.mass < 0.0) continue;
      std::ostringstream os;
      os << "eps * M = " << eps << " * " << g.mass << " >= 0 for forcing '" << sim.forcing
         << "': no pacemaker regime (target patterns need eps M < 0)";
      if (!opt.allow_positive_mass) throw ConfigError(os.str() + "; pass --allow-positive-mass to run anyway");
      if (warnings) warnings->push_back(os.str());
    }
  }
  return cfg;
}

RunConfig parse_config(const std::string& path, const ParseOptions& opt, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), opt, warnings);
}

std::string serialize_config(const RunConfig& cfg) {
  const SimConfig& s = cfg.sim;
  std::ostringstream os;
  os << "[grid]\n"
     << "nx = " << s.grid.nx() << "\n"
     << "ny = " << s.grid.ny() << "\n"
     << "lx = " << format_double(s.grid.lx()) << "\n"
     << "ly = " << format_double(s.grid.ly()) << "\n\n";
  os << "[kernels]\nL = " << s.L_kernel << "\nJ = " << s.J_kernel << "\n\n";
  os << "[forcing]\ng = " << s.forcing << "\n";
  if (!s.forcing_file.empty()) os << "file = " << s.forcing_file << "\n";
  os << "\n[run]\n"
     << "model = " << (s.model == Model::eikonal ? "eikonal" : "stuart-landau") << "\n"
     << "epsilon = " << format_double(s.epsilon) << "\n"
     << "qx = " << format_double(s.qx) << "\n"
     << "qy = " << format_double(s.qy) << "\n"
     << "dt = " << format_double(s.dt) << "\n"
     << "t_end = " << format_double(s.t_end) << "\n"
     << "snapshot_stride = " << s.snapshot_stride << "\n"
     << "dealias = " << (s.dealias ? "true" : "false") << "\n"
     << "nonlinear = " << (s.nonlinear ? "true" : "false") << "\n"
     << "seed = " << s.seed << "\n"
     << "initial = " << s.initial << "\n"
     << "sl_twist = " << format_double(s.sl_twist) << "\n\n";
  os << "[probes]\npoints = ";
  for (std::size_t k = 0; k < s.probes.size(); ++k) {
    os << (k ? "; " : "") << s.probes[k].first << "," << s.probes[k].second;
  }
  os << "\n\n";
  const AnalysisConfig& a = cfg.analysis;
  os << "[analysis]\neps = ";
  for (std::size_t k = 0; k < a.eps.size(); ++k) os << (k ? ", " : "") << format_double(a.eps[k]);
  os << "\n"
     << "simulate = " << (a.simulate ? "true" : "false") << "\n"
     << "window = " << format_double(a.window) << "\n"
     << "n_max = " << a.n_max << "\n"
     << "nbins = " << a.nbins << "\n"
     << "image = " << a.image << "\n";
  return os.str();
}

}  // namespace nleik
