#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "specres/contract_core.hpp"

namespace specres {

/// PaperFaithful uses the printed log closed form for the non-MC rebate;
/// Numerical maximizes the relaxed objective directly.
enum class SolveMode { PaperFaithful, Numerical };

std::string to_string(SolveMode mode);
/// Accepts "paper" / "paper-faithful" and "numerical". Throws DomainError otherwise.
SolveMode parse_solve_mode(const std::string& text);

enum class SolveErrorKind { ExistenceViolated, TypesIndistinguishable, DegenerateMarket };

class SolveError : public std::runtime_error {
 public:
  SolveError(SolveErrorKind kind, const std::string& what, double threshold = 0.0)
      : std::runtime_error(what), kind_(kind), threshold_(threshold) {}

  [[nodiscard]] SolveErrorKind kind() const noexcept { return kind_; }
  /// Largest admissible pi_c for ExistenceViolated, otherwise 0.
  [[nodiscard]] double threshold() const noexcept { return threshold_; }

 private:
  SolveErrorKind kind_;
  double threshold_;
};

struct SolverOptions {
  int grid_points = 4096;
  double feasibility_tol = kDefaultFeasibilityTol;
  /// H values closer than this are treated as equal; the smaller rebate wins.
  double tie_tol = 1e-12;
};

struct NumericRebate {
  /// argmax of the relaxed objective over the closed domain [0, r_max].
  double maximizer = 0.0;
  /// Best critical point of the relaxed objective, if any exists in [0, r_max].
  std::optional<double> interior;
  /// True when H(r_max) beats every interior critical point and H(0).
  bool boundary_flag = false;
  /// Every root of the fixed-point residual in [0, r_max].
  std::vector<double> critical_points;

  /// The rebate Numerical mode places in the menu: the interior candidate
  /// when one exists, otherwise the domain maximizer.
  [[nodiscard]] double chosen() const noexcept { return interior.value_or(maximizer); }
};

struct SolveResult {
  ContractMenu menu;
  SolveMode mode = SolveMode::PaperFaithful;
  double profit = 0.0;
  ConstraintReport constraints;
  std::vector<double> r_n_candidates;
  bool boundary_flag = false;
  bool existence_ok = false;
  /// Single-type fallback was used (pi_c is 0 or 1).
  bool degenerate = false;
  std::optional<double> closed_form_r_n;
  double numeric_r_n = 0.0;
  double r_max = 0.0;

  [[nodiscard]] bool feasible(double tol = kDefaultFeasibilityTol) const noexcept {
    return constraints.feasible(tol);
  }
};

/// pi_c ceiling under which the log closed form yields a nonnegative rebate:
/// lambda_n / (2 lambda_n - lambda_c).
double existence_threshold(const MarketParams& params);

/// r_max used when none is given: 50 / lambda_n.
double default_r_max(const MarketParams& params);

/// Optimal MC rebate; always the time-average channel cost.
double rebate_mc(const MarketParams& params);

/// ln(lambda_n pi_n / (pi_c (lambda_n - lambda_c))). Throws SolveError.
double rebate_nonmc_closed_form(const MarketParams& params);

/// psi(r) = kappa + pi_c (e^{(lambda_n - lambda_c) r} - 1) / (pi_n lambda_n) - r.
double fixed_point_residual(const MarketParams& params, double r);

/// Relaxed objective H(r_n) after substituting the binding IR_n and IC_cn.
double relaxed_objective(const MarketParams& params, double r_n);

/// All roots of the fixed-point residual in [0, r_max], ascending.
std::vector<double> rebate_nonmc_fixed_points(const MarketParams& params, double r_max,
                                              const SolverOptions& opts = {});

NumericRebate rebate_nonmc_numeric(const MarketParams& params, double r_max,
                                   const SolverOptions& opts = {});

/// Payments that make IR_n and IC_cn bind for the given rebates.
/// Returns {p_c, p_n}.
std::pair<double, double> advance_payments(const MarketParams& params, double r_c, double r_n);

/// Left side of the IC_nc certificate for binding payments.
double verify_ic_nc(const MarketParams& params, double r_c, double r_n);

/// Full-information benchmark: both rebates at kappa, IR binding per type.
ContractMenu first_best(const MarketParams& params);

SolveResult solve(const MarketParams& params, SolveMode mode,
                  std::optional<double> r_max = std::nullopt, const SolverOptions& opts = {});

}  // namespace specres
