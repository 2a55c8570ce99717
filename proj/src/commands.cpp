#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "specres/experiments.hpp"

namespace specres {

using nlohmann::json;

namespace {

json params_json(const MarketParams& p) {
  return {{"lambda_c", p.lambda_c()}, {"lambda_n", p.lambda_n()}, {"pi_c", p.pi_c()}, {"kappa", p.kappa()}};
}

json menu_json(const ContractMenu& m) {
  return {{"p_c", m.p_c}, {"r_c", m.r_c}, {"p_n", m.p_n}, {"r_n", m.r_n}};
}

bool write_text_file(const std::string& path, const std::string& body, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  f << body;
  if (!f) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

void print_solve(const MarketParams& params, const SolveResult& res, std::ostream& out) {
  const auto& m = res.menu;
  const auto& c = res.constraints;
  out << "mode: " << to_string(res.mode) << '\n'
      << "params: lambda_c=" << format_number(params.lambda_c()) << " lambda_n=" << format_number(params.lambda_n())
      << " pi_c=" << format_number(params.pi_c()) << " kappa=" << format_number(params.kappa()) << '\n'
      << "menu: p_c=" << format_number(m.p_c) << " r_c=" << format_number(m.r_c) << " p_n=" << format_number(m.p_n)
      << " r_n=" << format_number(m.r_n) << '\n'
      << "profit: " << format_number(res.profit) << '\n'
      << "slacks: ir_c=" << format_number(c.ir_c_slack) << " ir_n=" << format_number(c.ir_n_slack)
      << " ic_cn=" << format_number(c.ic_cn_slack) << " ic_nc=" << format_number(c.ic_nc_slack) << '\n'
      << "feasible: " << (res.feasible() ? "yes" : "no") << '\n'
      << "existence_ok: " << (res.existence_ok ? "yes" : "no") << '\n'
      << "degenerate: " << (res.degenerate ? "yes" : "no") << '\n'
      << "r_n_candidates:";
  for (double r : res.r_n_candidates) out << ' ' << format_number(r);
  out << '\n'
      << "closed_form_r_n: " << (res.closed_form_r_n ? format_number(*res.closed_form_r_n) : "none") << '\n'
      << "numeric_r_n: " << format_number(res.numeric_r_n) << '\n'
      << "r_max: " << format_number(res.r_max) << '\n'
      << "boundary_flag: " << (res.boundary_flag ? "yes" : "no") << '\n';
  if (res.boundary_flag) {
    out << "warning: relaxed objective at r_max = " << format_number(res.r_max)
        << " exceeds every interior critical point; excluding non-MC applications dominates screening\n";
  }
  if (!res.feasible()) {
    out << "warning: menu violates a constraint (min slack " << format_number(c.min_slack()) << ")\n";
  }
}

// Existence failures are "infeasible"; anything else is a config problem.
int report_solve_error(const SolveError& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return e.kind() == SolveErrorKind::ExistenceViolated ? exit_code::kInfeasible : exit_code::kConfig;
}

}  // namespace

json to_json(const SolveResult& r) {
  json j{{"mode", to_string(r.mode)},
         {"menu", menu_json(r.menu)},
         {"profit", r.profit},
         {"constraints",
          {{"ir_c_slack", r.constraints.ir_c_slack},
           {"ir_n_slack", r.constraints.ir_n_slack},
           {"ic_cn_slack", r.constraints.ic_cn_slack},
           {"ic_nc_slack", r.constraints.ic_nc_slack}}},
         {"feasible", r.feasible()},
         {"r_n_candidates", r.r_n_candidates},
         {"boundary_flag", r.boundary_flag},
         {"existence_ok", r.existence_ok},
         {"degenerate", r.degenerate},
         {"numeric_r_n", r.numeric_r_n},
         {"r_max", r.r_max}};
  j["closed_form_r_n"] = r.closed_form_r_n ? json(*r.closed_form_r_n) : json(nullptr);
  return j;
}

json to_json(const SimReport& r) {
  return {{"n_agents", r.n_agents},         {"n_mc", r.n_mc},
          {"empirical_profit", r.empirical_profit}, {"std_error", r.std_error},
          {"hold_rate_c", r.hold_rate_c},   {"hold_rate_n", r.hold_rate_n},
          {"truthful_rate", r.truthful_rate}, {"opt_out_rate", r.opt_out_rate},
          {"served_c", r.served_c},         {"served_n", r.served_n}};
}

double choice_aware_profit(const MarketParams& params, const ContractMenu& menu, bool opt_out_allowed) {
  double total = 0.0;
  for (AppType t : {AppType::MissionCritical, AppType::NonMissionCritical}) {
    const Choice ch = choose_contract(t, params.lambda(t), menu, opt_out_allowed);
    if (ch == Choice::OptOut) continue;
    const Contract k = menu.contract(ch == Choice::McContract ? AppType::MissionCritical
                                                              : AppType::NonMissionCritical);
    total += params.proportion(t) * type_profit(k.payment, k.rebate, params.lambda(t), params.kappa());
  }
  return total;
}

int cmd_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  MarketParams params = MarketParams::base();
  try {
    params = cfg.params();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }
  SolveResult res;
  try {
    res = solve(params, cfg.mode, cfg.r_max);
  } catch (const SolveError& e) {
    return report_solve_error(e, err);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }
  print_solve(params, res, out);
  if (cfg.out_path) {
    json rec{{"params", params_json(params)}, {"result", to_json(res)}};
    if (!write_text_file(*cfg.out_path, rec.dump(2) + "\n", err)) return exit_code::kConfig;
  }
  return exit_code::kOk;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<SweepRow> rows;
  try {
    const MarketParams params = cfg.params();
    rows = run_sweep(params, cfg.sweep, cfg.mode, cfg.r_max);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }

  std::ostringstream csv;
  write_sweep_csv(csv, cfg.sweep.variable, rows);
  if (cfg.out_path) {
    if (!write_text_file(*cfg.out_path, csv.str(), err)) return exit_code::kConfig;
  } else {
    out << csv.str();
  }
  if (cfg.svg_path) {
    std::ostringstream svg;
    write_sweep_svg(svg, cfg.sweep.variable, rows);
    if (!write_text_file(*cfg.svg_path, svg.str(), err)) return exit_code::kConfig;
  }
  const auto unsolved = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.solved; });
  if (unsolved > 0) {
    err << "warning: " << unsolved << " of " << rows.size()
        << " sweep points have no closed-form menu (existence condition violated)\n";
  }
  if (cfg.out_path) {
    out << "wrote " << rows.size() << " rows to " << *cfg.out_path << '\n';
  }
  return exit_code::kOk;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.sim) {
    err << "error: simulate needs a 'sim' config section\n";
    return exit_code::kConfig;
  }
  MarketParams params = MarketParams::base();
  SolveResult res;
  try {
    params = cfg.params();
    res = solve(params, cfg.mode, cfg.r_max);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const SolveError& e) {
    return report_solve_error(e, err);
  }

  ContractMenu menu = res.menu;
  menu.p_c += cfg.menu_adjust.p_c;
  menu.r_c += cfg.menu_adjust.r_c;
  menu.p_n += cfg.menu_adjust.p_n;
  menu.r_n += cfg.menu_adjust.r_n;
  SimReport rep;
  try {
    rep = simulate(params, menu, *cfg.sim);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }

  const double analytic = choice_aware_profit(params, menu, cfg.sim->opt_out_allowed);
  const double truthful_analytic = operator_profit(params, menu);
  const double diff = rep.empirical_profit - analytic;
  const bool pass = std::abs(diff) <= 3.0 * rep.std_error;

  out << "mode: " << to_string(cfg.mode) << '\n'
      << "menu: p_c=" << format_number(menu.p_c) << " r_c=" << format_number(menu.r_c)
      << " p_n=" << format_number(menu.p_n) << " r_n=" << format_number(menu.r_n) << '\n'
      << "agents: " << rep.n_agents << " (mc " << rep.n_mc << ") seed " << cfg.sim->seed << '\n'
      << "empirical_profit: " << format_number(rep.empirical_profit) << " +/- "
      << format_number(rep.std_error) << " (1 s.e.)\n"
      << "analytic_profit: " << format_number(analytic) << '\n'
      << "truthful_analytic_profit: " << format_number(truthful_analytic) << '\n'
      << "hold_rate_c: " << format_number(rep.hold_rate_c) << " (served " << rep.served_c << ")\n"
      << "hold_rate_n: " << format_number(rep.hold_rate_n) << " (served " << rep.served_n << ")\n"
      << "truthful_rate: " << format_number(rep.truthful_rate) << '\n'
      << "opt_out_rate: " << format_number(rep.opt_out_rate) << '\n'
      << "verdict: " << (pass ? "PASS" : "FAIL") << " |empirical - analytic| = " << format_number(std::abs(diff))
      << " vs 3 s.e. = " << format_number(3.0 * rep.std_error) << '\n';

  if (cfg.out_path) {
    json rec{{"params", params_json(params)},
             {"menu", menu_json(menu)},
             {"report", to_json(rep)},
             {"analytic_profit", analytic},
             {"truthful_analytic_profit", truthful_analytic},
             {"verdict", pass ? "PASS" : "FAIL"}};
    if (!write_text_file(*cfg.out_path, rec.dump(2) + "\n", err)) return exit_code::kConfig;
  }
  return pass ? exit_code::kOk : exit_code::kVerification;
}

int cmd_grid(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const GridSpec& g = cfg.grid;
  std::optional<TFGrid> grid;
  double kappa = 0.0;
  try {
    grid = generate_grid(g.horizon, g.channels, g.occupancy_prob, g.seed);
    kappa = time_average_cost(*grid, g.cost);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }

  std::uint32_t n_min = g.channels, n_max = 0, saturated = 0;
  double n_sum = 0.0;
  for (std::uint32_t t = 1; t <= grid->horizon(); ++t) {
    const std::uint32_t n = grid->free_channels(t);
    n_min = std::min(n_min, n);
    n_max = std::max(n_max, n);
    n_sum += n;
    saturated += n == 0 ? 1 : 0;
  }

  out << "grid: T=" << g.horizon << " C=" << g.channels << " occupancy_prob=" << format_number(g.occupancy_prob)
      << " seed=" << g.seed << '\n'
      << "free channels per slot: min=" << n_min << " mean=" << format_number(n_sum / g.horizon)
      << " max=" << n_max << '\n'
      << "cost model: " << to_string(g.cost.kind) << " a=" << format_number(g.cost.a)
      << " b=" << format_number(g.cost.b) << " max=" << format_number(g.cost.cost_at_zero()) << '\n'
      << "kappa: " << format_number(kappa) << '\n';
  if (saturated > 0) {
    out << "warning: " << saturated << " of " << g.horizon
        << " slots have no free channel (capacity exhausted; cost there is the maximum "
        << format_number(g.cost.cost_at_zero()) << ")\n";
  }

  if (cfg.out_path) {
    std::ostringstream body;
    write_grid(body, *grid);
    if (!write_text_file(*cfg.out_path, body.str(), err)) return exit_code::kConfig;
  }

  if (g.solve_with_kappa) {
    ExperimentConfig solve_cfg = cfg;
    solve_cfg.kappa = kappa;
    solve_cfg.out_path.reset();
    return cmd_solve(solve_cfg, out, err);
  }
  return exit_code::kOk;
}

}  // namespace specres
