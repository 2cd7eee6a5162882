#include "nleik/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "nleik/errors.hpp"
#include "nleik/io.hpp"
#include "nleik/stuart_landau.hpp"

namespace fs = std::filesystem;

namespace nleik {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void emit(const WarningSink& warn, const std::string& msg) {
  if (warn) warn(msg);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

class Outputs {
 public:
  Outputs(std::string dir, const RunConfig& cfg, std::string command) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
    m_.artifact_version = kArtifactVersion;
    m_.command = std::move(command);
    m_.started = utc_timestamp();
    const std::string text = serialize_config(cfg);
    m_.config_hash = sha256_hex(text);
    text_("config.ini", text);
  }

  const std::string& dir() const { return dir_; }

  void csv(const std::string& rel, const CsvTable& t) { text_(rel, csv_string(t)); }
  void text(const std::string& rel, const std::string& body) { text_(rel, body); }
  void checkpoint(const std::string& rel, const SimState& s) { text_(rel, checkpoint_bytes(s)); }
  void image(const std::string& rel, const ScalarField& phase, const std::string& kind) {
    if (kind == "none") return;
    text_(rel, pgm_bytes(phase_image(phase), kind == "P2" ? PgmFormat::P2 : PgmFormat::P5));
  }

  void finish() {
    m_.finished = utc_timestamp();
    write_manifest(dir_, m_);
  }

 private:
  void text_(const std::string& rel, const std::string& body) {
    atomic_write(join(dir_, rel), body);
    m_.outputs.push_back({rel, body.size(), sha256_hex(body)});
  }

  std::string dir_;
  RunManifest m_;
};

std::string snapshot_name(int step, const char* ext) {
  std::ostringstream os;
  os << "snapshots/step_" << std::setw(8) << std::setfill('0') << step << ext;
  return os.str();
}

CsvTable probe_table(const std::vector<double>& t, const std::vector<std::vector<double>>& series) {
  CsvTable tab;
  tab.header = {"t"};
  for (std::size_t p = 0; p < series.size(); ++p) tab.header.push_back("phi_probe" + std::to_string(p));
  tab.rows.reserve(t.size());
  for (std::size_t n = 0; n < t.size(); ++n) {
    std::vector<double> row{t[n]};
    for (const auto& s : series) row.push_back(s[n]);
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

CsvTable profile_table(const RunAnalysis& a) {
  const RadialProfile& p = a.profile;
  CsvTable tab;
  tab.header = {"r", "phi0", "anisotropy"};
  for (int n = 1; n <= p.n_max; ++n) tab.header.push_back("abs_mode" + std::to_string(n));
  for (std::size_t b = 0; b < p.radii.size(); ++b) {
    std::vector<double> row{p.radii[b], p.mode(0, b).real(), a.anisotropy[b]};
    for (int n = 1; n <= p.n_max; ++n) row.push_back(std::abs(p.mode(n, b)));
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

CsvTable decay_table(const RunAnalysis& a) {
  CsvTable tab;
  tab.header = {"delta", "C", "offset", "r_lo", "r_hi", "residual", "points", "sign_changes"};
  const DecayFit& d = a.decay;
  if (a.decay_ok) {
    tab.rows.push_back({d.delta, d.C, d.offset, d.r_lo, d.r_hi, d.residual, static_cast<double>(d.points),
                        d.sign_changes ? 1.0 : 0.0});
  }
  return tab;
}

CsvTable weighted_norm_table(const RunAnalysis& a) {
  CsvTable tab;
  tab.header = {"gamma", "norm"};
  for (const auto& [g, n] : a.decay.weighted_norms) tab.rows.push_back({g, n});
  return tab;
}

std::vector<double> analysis_row(const RunAnalysis& a) {
  const double om = a.frequency_ok ? a.frequency.omega : kNaN;
  const double k = a.wavenumber_ok ? a.wavenumber.k : kNaN;
  return {om,
          a.frequency_ok ? a.frequency.residual : kNaN,
          a.frequency.transient_warning ? 1.0 : 0.0,
          a.lambda > 0.0 ? a.lambda : kNaN,
          k,
          a.wavenumber_ok ? a.wavenumber.log_coefficient : kNaN,
          a.wavenumber_ok ? a.wavenumber.residual : kNaN,
          a.wavenumber_ok && om > 0.0 ? k * k / om : kNaN,
          a.decay_ok ? a.decay.delta : kNaN,
          a.decay_ok ? a.decay.C : kNaN,
          a.decay_ok ? a.decay.residual : kNaN};
}

const std::vector<std::string> kAnalysisColumns = {
    "omega_measured", "omega_fit_residual", "transient_warning", "lambda", "k_inf", "k_log_coefficient",
    "k_fit_residual", "k2_over_omega", "decay_delta", "decay_C", "decay_residual"};

std::vector<double> eps_list(const RunConfig& cfg) {
  if (!cfg.analysis.eps.empty()) return cfg.analysis.eps;
  return {cfg.sim.epsilon};
}

}  // namespace

RunConfig load_run_config(const CommandOptions& opt, bool check_mass) {
  ParseOptions po;
  po.allow_positive_mass = opt.allow_positive_mass;
  po.check_mass = check_mass;
  std::vector<std::string> warnings;
  RunConfig cfg = opt.config.empty() ? parse_config_string("", po, &warnings) : parse_config(opt.config, po, &warnings);
  for (const auto& w : warnings) emit(opt.warn, w);
  if (opt.seed) cfg.sim.seed = *opt.seed;
  return cfg;
}

RadialFunction radial_forcing(const SimConfig& cfg, const WarningSink& warn) {
  if (!cfg.forcing_file.empty()) {
    throw ConfigError("frequency predictions need a catalog forcing; '" + cfg.forcing_file + "' is sampled data");
  }
  const ForcingSpec g = forcing_from_spec(cfg.forcing, Grid2D::square(8, 1.0));
  if (!g.is_radial()) emit(warn, "forcing '" + cfg.forcing + "' is not radial; predictions use its angular average");
  return angular_average(g);
}

AsymptoticsResult predict_or_zero(double eps, const RadialFunction& g) {
  const double M = radial_mass(g);
  if (eps * M < 0.0) return predict(eps, g);
  AsymptoticsResult r;
  r.eps = eps;
  r.M = M;
  r.a01 = -M;
  r.a0 = eps * r.a01;
  r.r_c = M != 0.0 ? inner_rc(g).r_c : kNaN;
  return r;
}

RunAnalysis analyze_run(const std::vector<double>& t, const std::vector<double>& probe, const SimState& final_state,
                        const AnalysisConfig& a, const WarningSink& warn) {
  RunAnalysis out;
  try {
    out.frequency = measure_frequency(t, probe, a.window);
    out.frequency_ok = true;
    if (out.frequency.transient_warning) {
      emit(warn, "probe phase has not settled: half-window slopes " + format_double(out.frequency.slope_first_half) +
                     " and " + format_double(out.frequency.slope_second_half));
    }
  } catch (const ContractError& e) {
    emit(warn, std::string("frequency not measured: ") + e.what());
  }

  // Phase relative to the pacemaker center, so that mode 0 grows away from it.
  ScalarField shifted = final_state.phi;
  const Grid2D& g = shifted.grid;
  const double c = shifted.at(g.nx() / 2, g.ny() / 2);
  for (double& v : shifted.values) v -= c;
  out.profile = polar_decompose(shifted, a.n_max, a.nbins);
  out.anisotropy.resize(out.profile.radii.size());
  for (std::size_t b = 0; b < out.anisotropy.size(); ++b) {
    const Anisotropy an = anisotropy(out.profile, b);
    out.anisotropy[b] = an.defined ? an.value : kNaN;
  }

  if (!out.frequency_ok || !(out.frequency.omega > 0.0)) {
    emit(warn, "no positive pattern frequency; wavenumber and decay fits skipped");
    return out;
  }
  out.lambda = std::sqrt(out.frequency.omega);
  try {
    out.wavenumber = measure_wavenumber(out.profile, out.lambda);
    out.wavenumber_ok = true;
  } catch (const std::exception& e) {
    emit(warn, std::string("wavenumber not measured: ") + e.what());
  }
  try {
    const std::vector<double> phi0 = out.profile.real_mode0();
    DecayOptions d;
    // waves from periodic images meet at the box edge; their pull on phi0
    // decays like exp(-2 lambda (L/2 - r)), so stop 4/lambda short of it
    const double half = 0.5 * std::min(g.lx(), g.ly());
    d.r_lo = 2.0 / out.lambda;
    d.r_hi = std::min(out.profile.radii.back(), half - 4.0 / out.lambda);
    d.fit_offset = true;
    d.gammas = {0.0, 1.0};
    out.decay = decay_fit(out.profile.radii, core_residual(out.profile.radii, phi0, out.lambda), d);
    out.decay_ok = true;
  } catch (const std::exception& e) {
    emit(warn, std::string("decay not fitted: ") + e.what());
  }
  return out;
}

SimulateResult cmd_simulate(const CommandOptions& opt) {
  SimulateResult res;
  res.config = load_run_config(opt);
  const SimConfig& sim = res.config.sim;
  const AnalysisConfig& an = res.config.analysis;
  Outputs out(opt.out, res.config, "simulate");

  std::optional<RadialFunction> g;
  if (sim.forcing_file.empty()) g = radial_forcing(sim, opt.warn);

  if (sim.model == Model::stuart_landau) {
    const SlRun run = run_stuart_landau(sim);
    res.steps = static_cast<int>(run.times.size()) - 1;
    CsvTable probes = probe_table(run.times, run.slow_phase);
    probes.header.push_back("amplitude_deviation");
    for (std::size_t n = 0; n < probes.rows.size(); ++n) probes.rows[n].push_back(run.amplitude_deviation[n]);
    out.csv("probes.csv", probes);

    SimState fin;
    fin.t = run.times.back();
    fin.phi = ScalarField(sim.grid);
    for (std::size_t k = 0; k < fin.phi.values.size(); ++k) fin.phi.values[k] = std::arg(run.final_z.values[k]);
    out.checkpoint("final.chk", fin);
    out.image("final.pgm", fin.phi, an.image);

    const double t_from = 0.5 * sim.t_end;
    res.sl_max_amplitude_deviation = run.max_amplitude_deviation(t_from);
    const FrequencyFit f = measure_frequency(run.times, run.slow_phase.front(), an.window);
    res.sl_frequency_shift = f.omega;
    res.analysis.frequency = f;
    res.analysis.frequency_ok = true;
    if (f.transient_warning) emit(opt.warn, "slow phase has not settled");

    double reduced = kNaN;
    if (g) {
      res.prediction = predict_or_zero(sim.epsilon, *g);
      reduced = res.prediction->omega_schrodinger;
    }
    CsvTable summary;
    summary.header = {"t_end", "steps", "omega_shift", "omega_reduced", "expected_shift", "shift_ratio",
                      "max_amplitude_deviation", "transient_from"};
    const double expected = sim.epsilon * reduced;
    summary.rows.push_back({sim.t_end, static_cast<double>(res.steps), f.omega, reduced, expected,
                            f.omega / expected, res.sl_max_amplitude_deviation, t_from});
    out.csv("summary.csv", summary);
    out.finish();
    return res;
  }

  const SnapshotSink sink = [&](const SimState& s, int step) {
    out.checkpoint(snapshot_name(step, ".chk"), s);
    out.image(snapshot_name(step, ".pgm"), s.phi, an.image);
  };
  const Observables obs = run_simulation(sim, sink);
  res.steps = obs.steps;
  out.csv("probes.csv", probe_table(obs.times, obs.probe_series));
  out.checkpoint("final.chk", obs.final_state);
  out.image("final.pgm", obs.final_state.phi, an.image);

  res.analysis = analyze_run(obs.times, obs.probe_series.front(), obs.final_state, an, opt.warn);
  out.csv("profile.csv", profile_table(res.analysis));
  out.csv("decay.csv", decay_table(res.analysis));
  out.csv("weighted_norms.csv", weighted_norm_table(res.analysis));

  if (g && sim.epsilon * radial_mass(*g) < 0.0) res.prediction = predict(sim.epsilon, *g);
  CsvTable summary;
  summary.header = {"t_end", "steps"};
  summary.header.insert(summary.header.end(), kAnalysisColumns.begin(), kAnalysisColumns.end());
  summary.header.insert(summary.header.end(), {"omega_matched", "omega_shoot", "omega_schrod"});
  std::vector<double> row{obs.final_state.t, static_cast<double>(obs.steps)};
  const auto arow = analysis_row(res.analysis);
  row.insert(row.end(), arow.begin(), arow.end());
  if (res.prediction) {
    row.insert(row.end(),
               {res.prediction->omega_matched, res.prediction->omega_shoot, res.prediction->omega_schrodinger});
  } else {
    row.insert(row.end(), {kNaN, kNaN, kNaN});
  }
  summary.rows.push_back(std::move(row));
  out.csv("summary.csv", summary);
  out.finish();
  return res;
}

SweepResult cmd_sweep(const CommandOptions& opt) {
  const RunConfig cfg = load_run_config(opt);
  Outputs out(opt.out, cfg, "sweep");
  const std::vector<double> eps = eps_list(cfg);
  const RadialFunction g = radial_forcing(cfg.sim, opt.warn);

  std::mutex warn_mutex;
  const WarningSink warn = [&](const std::string& m) {
    std::lock_guard lock(warn_mutex);
    emit(opt.warn, m);
  };

  struct Member {
    SweepRow row;
    std::vector<double> t, probe;
    std::optional<SimState> final_state;
    std::exception_ptr error;
  };
  std::vector<Member> members(eps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < eps.size(); i = next++) {
      Member& m = members[i];
      try {
        const AsymptoticsResult p = predict_or_zero(eps[i], g);
        m.row = {eps[i], p.M, p.r_c, p.omega_matched, p.omega_shoot, p.omega_schrodinger, kNaN, kNaN, kNaN};
        if (cfg.analysis.simulate) {
          SimConfig sim = cfg.sim;
          sim.epsilon = eps[i];
          sim.snapshot_stride = 0;
          const Observables obs = run_simulation(sim);
          const std::string tag = "eps=" + format_double(eps[i]) + ": ";
          const RunAnalysis a = analyze_run(obs.times, obs.probe_series.front(), obs.final_state, cfg.analysis,
                                            [&](const std::string& w) { warn(tag + w); });
          if (a.frequency_ok) m.row.omega_measured = a.frequency.omega;
          if (a.wavenumber_ok) m.row.k_inf = a.wavenumber.k;
          m.t = obs.times;
          m.probe = obs.probe_series.front();
          m.final_state = obs.final_state;
        }
      } catch (...) {
        m.error = std::current_exception();
      }
    }
  };
  const int nw = std::clamp(opt.workers, 1, static_cast<int>(std::max<std::size_t>(1, eps.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& m : members) {
    if (m.error) std::rethrow_exception(m.error);
  }

  SweepResult res;
  for (const auto& m : members) res.rows.push_back(m.row);

  // ln omega_schrod = slope / eps + intercept over the pacemaker rows.
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : res.rows) {
    if (r.omega_schrod > 0.0) pts.emplace_back(1.0 / r.eps, std::log(r.omega_schrod));
  }
  if (pts.size() >= 2) {
    double sx = 0, sy = 0;
    for (const auto& [x, y] : pts) sx += x, sy += y;
    const double n = static_cast<double>(pts.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
    res.slope = sxy / sxx;
    res.intercept = my - res.slope * mx;
    double ss = 0;
    for (auto& r : res.rows) {
      if (r.omega_schrod > 0.0) {
        r.fit_residual = std::log(r.omega_schrod) - (res.slope / r.eps + res.intercept);
        ss += r.fit_residual * r.fit_residual;
      }
    }
    res.rms = std::sqrt(ss / n);
  } else {
    emit(opt.warn, "fewer than two pacemaker rows; scaling fit skipped");
    res.slope = res.intercept = res.rms = kNaN;
  }

  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i].final_state) continue;
    const std::string sub = "members/eps_" + std::to_string(i) + "/";
    out.csv(sub + "probes.csv", probe_table(members[i].t, {members[i].probe}));
    out.checkpoint(sub + "final.chk", *members[i].final_state);
  }

  CsvTable tab;
  tab.header = {"eps", "M", "r_c", "omega_matched", "omega_shoot", "omega_schrod", "omega_measured", "k_inf",
                "fit_residuals"};
  for (const auto& r : res.rows) {
    tab.rows.push_back({r.eps, r.M, r.r_c, r.omega_matched, r.omega_shoot, r.omega_schrod, r.omega_measured, r.k_inf,
                        r.fit_residual});
  }
  out.csv("sweep.csv", tab);
  CsvTable fit;
  fit.header = {"slope", "intercept", "rms", "expected_slope", "points"};
  const double M = res.rows.empty() ? kNaN : res.rows.front().M;
  fit.rows.push_back({res.slope, res.intercept, res.rms, 2.0 / M, static_cast<double>(pts.size())});
  out.csv("sweep_fit.csv", fit);
  out.finish();
  return res;
}

std::vector<OracleRow> cmd_oracle(const CommandOptions& opt) {
  const RunConfig cfg = load_run_config(opt);
  Outputs out(opt.out, cfg, "oracle");
  const RadialFunction g = radial_forcing(cfg.sim, opt.warn);
  std::vector<OracleRow> rows;
  for (double e : eps_list(cfg)) {
    const AsymptoticsResult p = predict_or_zero(e, g);
    if (!(e * p.M < 0.0) && e != 0.0) emit(opt.warn, "eps=" + format_double(e) + " is not a pacemaker; omega = 0");
    rows.push_back({e, p.M, p.r_c, p.a0, p.omega_matched, p.omega_shoot, p.omega_schrodinger});
  }
  CsvTable tab;
  tab.header = {"eps", "M", "r_c", "a0", "omega_matched", "omega_shoot", "omega_schrod"};
  for (const auto& r : rows) tab.rows.push_back({r.eps, r.M, r.r_c, r.a0, r.omega_matched, r.omega_shoot, r.omega_schrod});
  out.csv("oracle.csv", tab);
  out.finish();
  return rows;
}

AnalyzeResult cmd_analyze(const CommandOptions& opt) {
  if (opt.input.empty()) throw ConfigError("analyze needs --input DIR");
  std::error_code ec;
  if (fs::exists(opt.out) && fs::equivalent(opt.out, opt.input, ec)) {
    throw ConfigError("analyze --out must differ from --input");
  }
  const RunManifest m = read_manifest(opt.input);
  verify_manifest(opt.input, m);

  ParseOptions po;
  po.check_mass = false;
  AnalyzeResult res;
  res.config = parse_config(join(opt.input, "config.ini"), po);
  if (!opt.config.empty()) res.config.analysis = load_run_config(opt, false).analysis;

  const CsvTable probes = read_csv(join(opt.input, "probes.csv"));
  const SimState fin = read_checkpoint(join(opt.input, "final.chk"));
  res.analysis =
      analyze_run(probes.column_values("t"), probes.column_values("phi_probe0"), fin, res.config.analysis, opt.warn);

  Outputs out(opt.out, res.config, "analyze");
  CsvTable summary;
  summary.header = kAnalysisColumns;
  summary.header.insert(summary.header.begin(), "input_config_hash_ok");
  std::vector<double> row{m.config_hash == sha256_hex(serialize_config(res.config)) ? 1.0 : 0.0};
  const auto arow = analysis_row(res.analysis);
  row.insert(row.end(), arow.begin(), arow.end());
  summary.rows.push_back(std::move(row));
  out.csv("analysis.csv", summary);
  out.csv("profile.csv", profile_table(res.analysis));
  out.csv("decay.csv", decay_table(res.analysis));
  out.csv("weighted_norms.csv", weighted_norm_table(res.analysis));
  out.finish();
  return res;
}

HierarchyReport cmd_hierarchy_verify(const CommandOptions& opt) {
  const RunConfig cfg = load_run_config(opt, false);
  const Grid2D grid = opt.config.empty() ? Grid2D::square(128, 2.0 * std::numbers::pi) : cfg.sim.grid;
  const HierarchyReport rep = hierarchy_report(grid, cfg.sim.seed);
  Outputs out(opt.out, cfg, "hierarchy-verify");

  std::string h = "field,k,gamma_error,sigma_error,aliasing_warning\n";
  for (const auto& r : rep.rows) {
    h += r.field + "," + std::to_string(r.k) + "," + format_double(r.gamma_error) + "," + format_double(r.sigma_error) +
         "," + (r.aliasing_warning ? "1" : "0") + "\n";
    if (r.aliasing_warning) emit(opt.warn, "field '" + r.field + "' is not band-limited after exponentiation");
  }
  out.text("hierarchy.csv", h);

  CsvTable red;
  red.header = {"index", "lhs", "rhs", "relative_error"};
  for (std::size_t i = 0; i < rep.reductions.size(); ++i) {
    const auto& c = rep.reductions[i];
    red.rows.push_back({static_cast<double>(i), c.lhs, c.rhs, c.relative_error});
  }
  out.csv("reduction.csv", red);

  CsvTable disp;
  disp.header = {"k2", "omega", "b1", "b2"};
  for (const auto& [k2, om] : rep.dispersion_table) disp.rows.push_back({k2, om, rep.b1, rep.b2});
  out.csv("dispersion.csv", disp);
  out.finish();
  return rep;
}

}  // namespace nleik
