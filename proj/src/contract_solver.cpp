#include "specres/contract_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace specres {

namespace {

bool is_degenerate(const MarketParams& params) {
  return params.pi_c() == 0.0 || params.pi_c() == 1.0;
}

void require_r_max(double r_max) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    std::ostringstream os;
    os << "search bound r_max must be positive and finite, got " << r_max;
    throw DomainError(os.str());
  }
}

// Bisect a sign change of f on [lo, hi] down to adjacent doubles, then return
// whichever end has the smaller residual.
template <typename F>
double bisect(F&& f, double lo, double hi) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

}  // namespace

std::string to_string(SolveMode mode) {
  return mode == SolveMode::PaperFaithful ? "paper" : "numerical";
}

SolveMode parse_solve_mode(const std::string& text) {
  if (text == "paper" || text == "paper-faithful" || text == "PaperFaithful") {
    return SolveMode::PaperFaithful;
  }
  if (text == "numerical" || text == "Numerical") return SolveMode::Numerical;
  throw DomainError("unknown solve mode '" + text + "' (expected paper|numerical)");
}

double existence_threshold(const MarketParams& params) {
  const double ln = params.lambda_n();
  return ln / (2.0 * ln - params.lambda_c());
}

double default_r_max(const MarketParams& params) { return 50.0 / params.lambda_n(); }

double rebate_mc(const MarketParams& params) { return params.kappa(); }

double rebate_nonmc_closed_form(const MarketParams& params) {
  if (is_degenerate(params)) {
    std::ostringstream os;
    os << "pi_c = " << params.pi_c() << " leaves a single-type market; closed form undefined";
    throw SolveError(SolveErrorKind::DegenerateMarket, os.str());
  }
  const double lc = params.lambda_c();
  const double ln = params.lambda_n();
  if (lc == ln) {
    throw SolveError(SolveErrorKind::TypesIndistinguishable,
                     "lambda_c == lambda_n: types cannot be screened by the closed form");
  }
  const double threshold = existence_threshold(params);
  if (params.pi_c() > threshold) {
    std::ostringstream os;
    os.precision(10);
    os << "no nonnegative fixed-point rebate: pi_c = " << params.pi_c()
       << " exceeds lambda_n/(2 lambda_n - lambda_c) = " << threshold;
    throw SolveError(SolveErrorKind::ExistenceViolated, os.str(), threshold);
  }
  const double arg = ln * params.pi_n() / (params.pi_c() * (ln - lc));
  // At the threshold the argument is 1 up to rounding.
  return std::max(0.0, std::log(arg));
}

double fixed_point_residual(const MarketParams& params, double r) {
  const double pi_n = params.pi_n();
  const double ln = params.lambda_n();
  const double growth = std::expm1((ln - params.lambda_c()) * r);
  return params.kappa() + params.pi_c() * growth / (pi_n * ln) - r;
}

double relaxed_objective(const MarketParams& params, double r_n) {
  const double ln = params.lambda_n();
  const double lc = params.lambda_c();
  return std::exp(-ln * r_n) * (1.0 / ln + params.pi_n() * (r_n - params.kappa())) -
         (params.pi_c() / lc) * std::exp(-lc * r_n);
}

std::vector<double> rebate_nonmc_fixed_points(const MarketParams& params, double r_max,
                                              const SolverOptions& opts) {
  require_r_max(r_max);
  if (opts.grid_points < 2) throw DomainError("grid_points must be at least 2");
  std::vector<double> roots;
  // With no non-MC mass the residual is undefined and H is nondecreasing.
  if (params.pi_n() == 0.0) return roots;

  auto psi = [&params](double r) { return fixed_point_residual(params, r); };
  const int n = opts.grid_points;
  auto node = [&](int i) { return i == n - 1 ? r_max : r_max * i / (n - 1); };

  double x_prev = node(0);
  double f_prev = psi(x_prev);
  if (f_prev == 0.0) roots.push_back(x_prev);
  for (int i = 1; i < n; ++i) {
    const double x = node(i);
    const double f = psi(x);
    if (f == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && std::isfinite(f_prev) && ((f_prev < 0.0) != (f < 0.0))) {
      roots.push_back(bisect(psi, x_prev, x));
    }
    x_prev = x;
    f_prev = f;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

NumericRebate rebate_nonmc_numeric(const MarketParams& params, double r_max,
                                   const SolverOptions& opts) {
  NumericRebate out;
  out.critical_points = rebate_nonmc_fixed_points(params, r_max, opts);

  auto H = [&params](double r) { return relaxed_objective(params, r); };
  // Strictly better by more than the tie tolerance; otherwise keep the
  // incumbent, which is always the smaller rebate because candidates are
  // visited in ascending order.
  auto better = [&](double challenger, double incumbent) {
    return H(challenger) > H(incumbent) + opts.tie_tol;
  };

  for (double r : out.critical_points) {
    if (!out.interior || better(r, *out.interior)) out.interior = r;
  }

  double best = 0.0;
  if (out.interior && better(*out.interior, best)) best = *out.interior;
  if (better(r_max, best)) {
    best = r_max;
    out.boundary_flag = true;
  }
  out.maximizer = best;
  return out;
}

std::pair<double, double> advance_payments(const MarketParams& params, double r_c, double r_n) {
  const double lc = params.lambda_c();
  const double p_n = reservation_value(r_n, params.lambda_n());
  const double p_c = p_n + r_c - r_n + (std::exp(-lc * r_c) - std::exp(-lc * r_n)) / lc;
  return {p_c, p_n};
}

double verify_ic_nc(const MarketParams& params, double r_c, double r_n) {
  const double lc = params.lambda_c();
  const double ln = params.lambda_n();
  return (std::exp(-ln * r_n) - std::exp(-ln * r_c)) / ln +
         (std::exp(-lc * r_c) - std::exp(-lc * r_n)) / lc;
}

ContractMenu first_best(const MarketParams& params) {
  const double k = params.kappa();
  return {reservation_value(k, params.lambda_c()), k, reservation_value(k, params.lambda_n()), k};
}

SolveResult solve(const MarketParams& params, SolveMode mode, std::optional<double> r_max,
                  const SolverOptions& opts) {
  SolveResult res;
  res.mode = mode;
  res.r_max = r_max.value_or(default_r_max(params));
  require_r_max(res.r_max);

  const NumericRebate numeric = rebate_nonmc_numeric(params, res.r_max, opts);
  res.r_n_candidates = numeric.critical_points;
  res.boundary_flag = numeric.boundary_flag;
  res.numeric_r_n = numeric.chosen();

  const double r_c = rebate_mc(params);
  double r_n = 0.0;

  if (is_degenerate(params)) {
    // Single-type market: the non-MC contract is either the only one offered
    // (pi_c = 0) or pushed to the search bound so nobody is served by it
    // (pi_c = 1), the limit of the two-type menu.
    res.degenerate = true;
    res.existence_ok = true;
    r_n = params.pi_c() == 0.0 ? params.kappa() : res.r_max;
  } else {
    res.existence_ok =
        params.lambda_c() < params.lambda_n() && params.pi_c() <= existence_threshold(params);
    try {
      res.closed_form_r_n = rebate_nonmc_closed_form(params);
    } catch (const SolveError&) {
      if (mode == SolveMode::PaperFaithful) throw;
    }
    r_n = mode == SolveMode::PaperFaithful ? *res.closed_form_r_n : res.numeric_r_n;
  }

  const auto [p_c, p_n] = advance_payments(params, r_c, r_n);
  res.menu = {p_c, r_c, p_n, r_n};
  res.profit = operator_profit(params, res.menu);
  res.constraints = constraint_slacks(params, res.menu);
  return res;
}

}  // namespace specres
