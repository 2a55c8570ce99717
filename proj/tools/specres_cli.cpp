// specres: solve, sweep, simulate, and grid subcommands over the contract library.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specres/experiments.hpp"

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> svg;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config file");
  cmd->add_option("--mode", f.mode, "Solver mode")->check(CLI::IsMember({"paper", "numerical"}));
  cmd->add_option("--seed", f.seed, "Seed for simulation and grid generation");
  cmd->add_option("--out", f.out, "Primary output file (record, CSV, or grid)");
  cmd->add_option("--svg", f.svg, "SVG chart output (sweep)");
  cmd->add_option("--override", f.overrides, "Config override key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal two-type spectrum reservation contracts: solver, sweeps, simulation"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* solve = app.add_subcommand("solve", "Solve the optimal contract menu");
  auto* sweep = app.add_subcommand("sweep", "Sweep pi_c, lambda_c, or kappa and write CSV/SVG");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the solved menu");
  auto* grid = app.add_subcommand("grid", "Generate a time-frequency grid and its average cost");
  bool grid_solve = false;
  for (auto* cmd : {solve, sweep, simulate, grid}) add_common(cmd, flags);
  grid->add_flag("--solve", grid_solve, "Solve the menu using the grid's time-average cost");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : specres::exit_code::kConfig;
  }

  std::vector<std::string> overrides;
  if (flags.mode) overrides.push_back("mode=\"" + *flags.mode + "\"");
  if (flags.seed) {
    overrides.push_back("sim.seed=" + std::to_string(*flags.seed));
    overrides.push_back("grid.seed=" + std::to_string(*flags.seed));
  }
  if (flags.out) overrides.push_back("output.out=" + nlohmann::json(*flags.out).dump());
  if (flags.svg) overrides.push_back("output.svg=" + nlohmann::json(*flags.svg).dump());
  if (grid_solve) overrides.push_back("grid.solve_with_kappa=true");
  // Explicit --override flags win over the convenience flags.
  overrides.insert(overrides.end(), flags.overrides.begin(), flags.overrides.end());

  specres::ExperimentConfig cfg;
  try {
    cfg = specres::load_config(flags.config, overrides);
  } catch (const specres::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return specres::exit_code::kConfig;
  }

  if (solve->parsed()) return specres::cmd_solve(cfg, std::cout, std::cerr);
  if (sweep->parsed()) return specres::cmd_sweep(cfg, std::cout, std::cerr);
  if (simulate->parsed()) return specres::cmd_simulate(cfg, std::cout, std::cerr);
  return specres::cmd_grid(cfg, std::cout, std::cerr);
}
