#pragma once

// Experiment configuration, parameter sweeps, and the command implementations
// behind the specres CLI. Commands write human-readable text to `out`,
// diagnostics to `err`, and return the process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "specres/contract_core.hpp"
#include "specres/contract_solver.hpp"
#include "specres/market_sim.hpp"
#include "specres/spectrum_grid.hpp"

namespace specres {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 1;
inline constexpr int kInfeasible = 2;
inline constexpr int kVerification = 3;
}  // namespace exit_code

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepVariable { PiC, LambdaC, Kappa };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::PiC;
  double from = 0.05;
  double to = 0.45;
  std::uint32_t steps = 41;

  /// Evenly spaced points, endpoints included exactly.
  [[nodiscard]] std::vector<double> points() const;
};

struct GridSpec {
  std::uint32_t horizon = 1000;
  std::uint32_t channels = 10;
  double occupancy_prob = 0.3;
  std::uint64_t seed = 1;
  ChannelCostModel cost = ChannelCostModel::constant(0.1);
  /// Feed the time-average cost into a solve after generating the grid.
  bool solve_with_kappa = false;
};

struct ExperimentConfig {
  // Raw parameter values; params() validates them.
  double lambda_c = 0.2;
  double lambda_n = 1.0;
  double pi_c = 0.2;
  double kappa = 0.1;
  SolveMode mode = SolveMode::PaperFaithful;
  std::optional<double> r_max;
  SweepSpec sweep;
  std::optional<SimConfig> sim;
  /// Added to the solved menu before simulation (fault injection).
  ContractMenu menu_adjust;
  GridSpec grid;
  std::optional<std::string> out_path;
  std::optional<std::string> svg_path;

  /// Throws ConfigError with an actionable message when lambda_c >= lambda_n,
  /// pi_c is outside [0, 1] or kappa is negative.
  [[nodiscard]] MarketParams params() const;
};

/// Built-in defaults: the base evaluation instance.
nlohmann::json default_config_json();

/// Sets a dotted key (e.g. "params.pi_c") to a value parsed as JSON, falling
/// back to a plain string. Throws ConfigError on a malformed override.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Merges `user` over the defaults and converts. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& user);
ExperimentConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides);

struct SweepRow {
  double value = 0.0;
  ContractMenu menu;
  double profit = 0.0;
  bool existence_ok = false;
  bool boundary_flag = false;
  bool solved = false;
};

/// Fixed CSV column order.
inline constexpr const char* kSweepCsvHeader =
    "variable,value,p_c,r_c,p_n,r_n,profit,existence_ok,boundary_flag";

void validate_sweep(const SweepSpec& sweep, const MarketParams& params);
std::vector<SweepRow> run_sweep(const MarketParams& params, const SweepSpec& sweep, SolveMode mode,
                                std::optional<double> r_max = std::nullopt);

/// %.12g formatting; "nan" for non-finite values.
std::string format_number(double v);
void write_sweep_csv(std::ostream& os, SweepVariable variable, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);
/// Line chart of the four menu components against the swept variable.
void write_sweep_svg(std::ostream& os, SweepVariable variable, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const SimReport& r);

/// Expected per-agent profit given each type's deterministic contract choice
/// (0 for opting out). Equals operator_profit for incentive-compatible menus.
double choice_aware_profit(const MarketParams& params, const ContractMenu& menu,
                           bool opt_out_allowed);

int cmd_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_grid(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace specres
