// relbundle: batch front-end for the lattice laboratory.
//
//   relbundle run <config.json> [--base DIR]
//   relbundle compare <report...> [--out FILE]
//   relbundle selftest
//   relbundle dump-kernel <config.json> <out.bin> [--sources 0,3,...]
//
// Exit codes: 0 all invariants within tolerance, 1 violation, 2 configuration error.

#include "relbundle/kernel_io.hpp"
#include "relbundle/selftest.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using namespace relbundle;

constexpr int exit_ok = 0;
constexpr int exit_violation = 1;
constexpr int exit_config = 2;

int cmd_run(const std::string& config, const std::string& base) {
  const auto scenarios = scenario::load_scenarios(config);
  const auto reports = runner::run_batch(scenarios, base);
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.scenario.name << " -> " << runner::output_directory(r.scenario, base).string() << "\n";
    for (const auto& c : r.invariants)
      std::cout << "  " << (c.ok() ? "ok  " : "FAIL") << " " << c.name << " = " << runner::fmt(c.value) << " (tol "
                << c.tolerance << ")\n";
    for (const auto& w : r.warnings) std::cout << "  warning: " << w << "\n";
    ok = ok && r.all_ok();
  }
  return ok ? exit_ok : exit_violation;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& out) {
  std::vector<scenario::json> reports;
  for (const auto& p : paths) reports.push_back(runner::load_report(p));
  const std::string csv = runner::compare_reports(reports);
  if (out.empty()) {
    std::cout << csv;
  } else {
    runner::write_text(out, csv);
  }
  return exit_ok;
}

int cmd_selftest() {
  bool ok = true;
  for (const auto& c : selftest::run_all()) {
    selftest::print(std::cout, c);
    ok = ok && c.passed;
  }
  return ok ? exit_ok : exit_violation;
}

green::GreenKernel kernel_for(const scenario::Scenario& s) {
  const Lattice lat = s.lattice();
  const auto pot = scenario::make_potential(s.potential, lat, s.constants.e, s.constants.hbar);
  switch (s.equation) {
    case scenario::Equation::dirac: return green::dirac_green(clifford::build_gamma_set(), pot, s.constants.m);
    case scenario::Equation::kg_two_component: return green::kg_green_tilde(pot, s.constants.m);
    case scenario::Equation::kg_scalar:
    case scenario::Equation::kg_five_component: return green::kg_scalar_green(pot, s.constants.m);
    case scenario::Equation::schrodinger: {
      if (!pot.is_static()) throw ConfigError("schrodinger kernels need a time-independent potential");
      std::vector<double> v;
      for (int x = 0; x < lat.nx; ++x) v.push_back(pot.e * pot.A[0](0, x).real());
      return green::schrodinger_green(green::schrodinger_hamiltonian(lat, s.constants.m, s.constants.hbar, v), lat,
                                      s.constants.hbar);
    }
  }
  throw ConfigError("unsupported equation");
}

int cmd_dump(const std::string& config, const std::string& out, const std::vector<int>& sources) {
  const auto scenarios = scenario::load_scenarios(config);
  if (scenarios.size() != 1) throw ConfigError("dump-kernel needs a config with exactly one scenario");
  const auto g = kernel_for(scenarios.front());
  kernel_io::write_dump(out, g, sources);
  std::cout << "wrote " << green::family_name(g.family()) << " kernel to " << out << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relbundle: Dirac and Klein-Gordon lattice laboratory"};
  app.require_subcommand(1);

  std::string config, base, out;
  std::vector<std::string> reports;
  std::vector<int> sources;

  auto* run = app.add_subcommand("run", "run the scenarios of a config file");
  run->add_option("config", config, "scenario config (JSON)")->required();
  run->add_option("--base", base, "directory that relative output_dir values resolve against");

  auto* compare = app.add_subcommand("compare", "compare run reports (convergence orders, deviations)");
  compare->add_option("reports", reports, "report.json files or run directories")->required();
  compare->add_option("--out", out, "write the CSV here instead of stdout");

  auto* self = app.add_subcommand("selftest", "run the acceptance suite");

  auto* dump = app.add_subcommand("dump-kernel", "write the scenario's Green kernel as a binary dump");
  dump->add_option("config", config, "scenario config (JSON)")->required();
  dump->add_option("out", out, "output file")->required();
  dump->add_option("--sources", sources, "source slices to dump (default: all)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run) return cmd_run(config, base);
    if (*compare) return cmd_compare(reports, out);
    if (*self) return cmd_selftest();
    if (*dump) return cmd_dump(config, out, sources);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const BudgetExceeded& e) {
    std::cerr << "memory budget: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_violation;
  }
  return exit_config;
}
