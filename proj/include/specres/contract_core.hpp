#pragma once

// Two-type reservation market: exponential utility analytics, operator
// profit, and IR/IC constraint evaluation. All monetary quantities are in
// abstract monetary units (MU).

#include <stdexcept>
#include <string>

namespace specres {

/// Raised when an argument lies outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Application type being screened.
enum class AppType { MissionCritical, NonMissionCritical };

inline constexpr double kDefaultFeasibilityTol = 1e-9;

/// Problem instance. Construction validates 0 < lambda_c <= lambda_n,
/// pi_c in [0,1] and kappa >= 0.
class MarketParams {
 public:
  MarketParams(double lambda_c, double lambda_n, double pi_c, double kappa);

  [[nodiscard]] double lambda_c() const noexcept { return lambda_c_; }
  [[nodiscard]] double lambda_n() const noexcept { return lambda_n_; }
  [[nodiscard]] double pi_c() const noexcept { return pi_c_; }
  [[nodiscard]] double pi_n() const noexcept { return 1.0 - pi_c_; }
  [[nodiscard]] double kappa() const noexcept { return kappa_; }

  [[nodiscard]] double lambda(AppType t) const noexcept {
    return t == AppType::MissionCritical ? lambda_c_ : lambda_n_;
  }
  [[nodiscard]] double proportion(AppType t) const noexcept {
    return t == AppType::MissionCritical ? pi_c() : pi_n();
  }

  [[nodiscard]] MarketParams with_lambda_c(double v) const { return {v, lambda_n_, pi_c_, kappa_}; }
  [[nodiscard]] MarketParams with_lambda_n(double v) const { return {lambda_c_, v, pi_c_, kappa_}; }
  [[nodiscard]] MarketParams with_pi_c(double v) const { return {lambda_c_, lambda_n_, v, kappa_}; }
  [[nodiscard]] MarketParams with_kappa(double v) const { return {lambda_c_, lambda_n_, pi_c_, v}; }

  /// Base instance used throughout the evaluation: (0.2, 1, 0.2, 0.1).
  static MarketParams base() { return {0.2, 1.0, 0.2, 0.1}; }

 private:
  double lambda_c_;
  double lambda_n_;
  double pi_c_;
  double kappa_;
};

/// One (advance payment, rebate) pair.
struct Contract {
  double payment = 0.0;
  double rebate = 0.0;
};

/// The menu offered to both types. Values must be nonnegative; see validate().
struct ContractMenu {
  double p_c = 0.0;
  double r_c = 0.0;
  double p_n = 0.0;
  double r_n = 0.0;

  [[nodiscard]] Contract contract(AppType t) const noexcept {
    return t == AppType::MissionCritical ? Contract{p_c, r_c} : Contract{p_n, r_n};
  }

  /// Throws DomainError if any component is negative or not finite.
  void validate() const;

  bool operator==(const ContractMenu&) const = default;
};

struct ConstraintReport {
  double ir_c_slack = 0.0;
  double ir_n_slack = 0.0;
  double ic_cn_slack = 0.0;
  double ic_nc_slack = 0.0;

  [[nodiscard]] bool feasible(double tol = kDefaultFeasibilityTol) const noexcept;
  [[nodiscard]] double min_slack() const noexcept;
};

/// 1 - exp(-lambda v).
double exp_cdf(double v, double lambda);

/// E[max(r, V)] for V ~ Exp(lambda): r + exp(-lambda r) / lambda.
double reservation_value(double r, double lambda);

/// Expected per-application operator profit under truthful selection.
double operator_profit(const MarketParams& params, const ContractMenu& menu);

/// Profit contributed by one type, before weighting by its proportion.
double type_profit(double payment, double rebate, double lambda, double kappa);

ConstraintReport constraint_slacks(const MarketParams& params, const ContractMenu& menu);

/// Exponential with rate lambda_a first-order stochastically dominates rate
/// lambda_b iff lambda_a <= lambda_b.
bool fsd_dominates(double lambda_a, double lambda_b);

std::string to_string(AppType t);

}  // namespace specres
