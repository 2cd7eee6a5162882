// Command-line front end. Exit codes: 0 success, 1 configuration or contract
// error, 2 numerical failure, 3 I/O failure.

#include <cmath>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "nleik/commands.hpp"
#include "nleik/errors.hpp"

namespace {

void print_report(const nleik::HierarchyReport& rep) {
  std::cout << "hierarchy: max relative error " << rep.max_error() << ", reduction identity max error "
            << rep.max_reduction_error() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace nleik;
  CLI::App app{"Pseudo-spectral nonlocal eikonal simulator and frequency oracles"};
  app.require_subcommand(1);

  CommandOptions opt;
  opt.warn = [](const std::string& m) { std::cerr << "WARN: " << m << "\n"; };
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "Run configuration file");
    // a missing file surfaces as an I/O error (exit 3), not a usage error
    if (needs_config) c->required();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Override run.seed");
    sub->add_flag("--allow-positive-mass", opt.allow_positive_mass, "Accept eps*M >= 0 with a warning");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one simulation and analyze it");
  common(simulate, true);
  auto* sweep = app.add_subcommand("sweep", "Predict (and optionally simulate) omega over analysis.eps");
  common(sweep, true);
  sweep->add_option("--workers", opt.workers, "Concurrent sweep members")->check(CLI::PositiveNumber);
  auto* analyze = app.add_subcommand("analyze", "Re-analyze a verified simulation output directory");
  common(analyze, false);
  analyze->add_option("--input", opt.input, "Directory written by simulate")->required();
  auto* oracle = app.add_subcommand("oracle", "Frequency predictions only");
  common(oracle, false);
  auto* hier = app.add_subcommand("hierarchy-verify", "Check the phase-hierarchy identities");
  common(hier, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (auto* sub : {simulate, sweep, analyze, oracle, hier}) {
    if (sub->count("--seed") > 0) opt.seed = seed;
  }
  if (analyze->parsed() && analyze->count("--out") == 0) {
    opt.out = (std::filesystem::path(opt.input) / "analysis").string();
  }

  try {
    if (simulate->parsed()) {
      const SimulateResult r = cmd_simulate(opt);
      std::cout << "steps " << r.steps << ", omega_measured " << r.analysis.frequency.omega;
      if (r.analysis.wavenumber_ok) std::cout << ", k_inf " << r.analysis.wavenumber.k;
      if (r.prediction) std::cout << ", omega_schrod " << r.prediction->omega_schrodinger;
      std::cout << "\n";
    } else if (sweep->parsed()) {
      const SweepResult r = cmd_sweep(opt);
      std::cout << "sweep: " << r.rows.size() << " members, slope of ln omega vs 1/eps " << r.slope << "\n";
    } else if (analyze->parsed()) {
      const AnalyzeResult r = cmd_analyze(opt);
      std::cout << "omega_measured " << r.analysis.frequency.omega << "\n";
    } else if (oracle->parsed()) {
      for (const auto& r : cmd_oracle(opt)) {
        std::cout << "eps " << r.eps << ": omega_matched " << r.omega_matched << ", omega_shoot " << r.omega_shoot
                  << ", omega_schrod " << r.omega_schrod << "\n";
      }
    } else if (hier->parsed()) {
      print_report(cmd_hierarchy_verify(opt));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
