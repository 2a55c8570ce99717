#include "specres/contract_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace specres {

namespace {

void require_rate(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    std::ostringstream os;
    os << "rate must be positive and finite, got " << lambda;
    throw DomainError(os.str());
  }
}

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be nonnegative and finite, got " << v;
    throw DomainError(os.str());
  }
}

}  // namespace

MarketParams::MarketParams(double lambda_c, double lambda_n, double pi_c, double kappa)
    : lambda_c_(lambda_c), lambda_n_(lambda_n), pi_c_(pi_c), kappa_(kappa) {
  require_rate(lambda_c);
  require_rate(lambda_n);
  if (lambda_c > lambda_n) {
    std::ostringstream os;
    os << "lambda_c (" << lambda_c << ") must not exceed lambda_n (" << lambda_n
       << "); mission-critical utility must dominate";
    throw DomainError(os.str());
  }
  if (!(pi_c >= 0.0 && pi_c <= 1.0)) {
    std::ostringstream os;
    os << "pi_c must lie in [0, 1], got " << pi_c;
    throw DomainError(os.str());
  }
  require_nonneg(kappa, "kappa");
}

void ContractMenu::validate() const {
  require_nonneg(p_c, "p_c");
  require_nonneg(r_c, "r_c");
  require_nonneg(p_n, "p_n");
  require_nonneg(r_n, "r_n");
}

bool ConstraintReport::feasible(double tol) const noexcept { return min_slack() >= -tol; }

double ConstraintReport::min_slack() const noexcept {
  return std::min({ir_c_slack, ir_n_slack, ic_cn_slack, ic_nc_slack});
}

double exp_cdf(double v, double lambda) {
  require_nonneg(v, "v");
  require_rate(lambda);
  return -std::expm1(-lambda * v);
}

double reservation_value(double r, double lambda) {
  require_nonneg(r, "rebate");
  require_rate(lambda);
  return r + std::exp(-lambda * r) / lambda;
}

double type_profit(double payment, double rebate, double lambda, double kappa) {
  return payment - rebate + std::exp(-lambda * rebate) * (rebate - kappa);
}

double operator_profit(const MarketParams& params, const ContractMenu& menu) {
  menu.validate();
  return params.pi_c() * type_profit(menu.p_c, menu.r_c, params.lambda_c(), params.kappa()) +
         params.pi_n() * type_profit(menu.p_n, menu.r_n, params.lambda_n(), params.kappa());
}

ConstraintReport constraint_slacks(const MarketParams& params, const ContractMenu& menu) {
  menu.validate();
  const double lc = params.lambda_c();
  const double ln = params.lambda_n();
  const double net_cc = reservation_value(menu.r_c, lc) - menu.p_c;
  const double net_cn = reservation_value(menu.r_n, lc) - menu.p_n;
  const double net_nn = reservation_value(menu.r_n, ln) - menu.p_n;
  const double net_nc = reservation_value(menu.r_c, ln) - menu.p_c;
  return {net_cc, net_nn, net_cc - net_cn, net_nn - net_nc};
}

bool fsd_dominates(double lambda_a, double lambda_b) {
  require_rate(lambda_a);
  require_rate(lambda_b);
  return lambda_a <= lambda_b;
}

std::string to_string(AppType t) {
  return t == AppType::MissionCritical ? "mc" : "nonmc";
}

}  // namespace specres
