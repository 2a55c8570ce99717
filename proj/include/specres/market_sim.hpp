#pragma once

// Agent-based Monte Carlo of the two-stage reservation protocol: each agent
// picks a contract knowing only its utility distribution, then learns its
// utility and either holds the block or releases it for the rebate.

#include <cstdint>
#include <string>

#include "specres/contract_core.hpp"

namespace specres {

struct SimConfig {
  std::uint64_t n_agents = 100000;
  std::uint64_t seed = 1;
  bool opt_out_allowed = true;
  /// Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads = 0;

  void validate() const;
};

struct SimReport {
  std::uint64_t n_agents = 0;
  std::uint64_t n_mc = 0;
  double empirical_profit = 0.0;  // MU per agent
  double std_error = 0.0;
  double hold_rate_c = 0.0;
  double hold_rate_n = 0.0;
  double truthful_rate = 0.0;
  double opt_out_rate = 0.0;
  /// Agents of each true type that took some contract (hold-rate denominators).
  std::uint64_t served_c = 0;
  std::uint64_t served_n = 0;

  bool operator==(const SimReport&) const = default;
};

enum class Choice { McContract, NonMcContract, OptOut };

std::string to_string(Choice c);

/// Counter-based stream: SplitMix64 started from a hash of (seed, index), so
/// agent i sees the same draws regardless of scheduling.
class AgentStream {
 public:
  AgentStream(std::uint64_t seed, std::uint64_t index) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double exponential(double lambda) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Expected-net-utility maximizing choice. Ties within `tie_tol` go to the
/// agent's own-type contract first and to opting out last.
Choice choose_contract(AppType own_type, double lambda, const ContractMenu& menu,
                       bool opt_out_allowed, double tie_tol = kDefaultFeasibilityTol);

SimReport simulate(const MarketParams& params, const ContractMenu& menu, const SimConfig& config);

/// Expected profit by composite Simpson quadrature over the utility density
/// (truthful selection). Independent of the closed-form profit expression.
double numeric_profit_oracle(const MarketParams& params, const ContractMenu& menu,
                             std::uint64_t steps);

/// Fraction of simulated agents that select their own type's contract.
double ic_empirical_check(const MarketParams& params, const ContractMenu& menu,
                          const SimConfig& config);

}  // namespace specres
