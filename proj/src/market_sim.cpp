#include "specres/market_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>
#include <vector>

namespace specres {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

struct AgentOutcome {
  AppType type = AppType::NonMissionCritical;
  Choice choice = Choice::OptOut;
  bool held = false;
  double profit = 0.0;
};

AgentOutcome run_agent(const MarketParams& params, const ContractMenu& menu,
                       const SimConfig& config, std::uint64_t index) {
  AgentStream rng(config.seed, index);
  AgentOutcome out;
  out.type = rng.bernoulli(params.pi_c()) ? AppType::MissionCritical : AppType::NonMissionCritical;
  const double lambda = params.lambda(out.type);
  // Always consume the utility draw so stream positions do not depend on the choice.
  const double utility = rng.exponential(lambda);

  out.choice = choose_contract(out.type, lambda, menu, config.opt_out_allowed);
  if (out.choice == Choice::OptOut) return out;

  const Contract c = menu.contract(out.choice == Choice::McContract ? AppType::MissionCritical
                                                                    : AppType::NonMissionCritical);
  out.held = utility > c.rebate;
  out.profit = c.payment - (out.held ? params.kappa() : c.rebate);
  return out;
}

bool is_own(const AgentOutcome& o) {
  return (o.type == AppType::MissionCritical && o.choice == Choice::McContract) ||
         (o.type == AppType::NonMissionCritical && o.choice == Choice::NonMcContract);
}

std::vector<AgentOutcome> run_agents(const MarketParams& params, const ContractMenu& menu,
                                     const SimConfig& config) {
  const std::uint64_t n = config.n_agents;
  std::vector<AgentOutcome> outcomes(n);
  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, n / 4096)));

  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) outcomes[i] = run_agent(params, menu, config, i);
  };
  if (workers <= 1) {
    work(0, n);
    return outcomes;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min(n, w * chunk);
    const std::uint64_t end = std::min(n, begin + chunk);
    pool.emplace_back(work, begin, end);
  }
  pool.clear();
  return outcomes;
}

}  // namespace

void SimConfig::validate() const {
  if (n_agents < 1) throw DomainError("n_agents must be at least 1");
}

std::string to_string(Choice c) {
  switch (c) {
    case Choice::McContract: return "mc-contract";
    case Choice::NonMcContract: return "nonmc-contract";
    case Choice::OptOut: return "opt-out";
  }
  return "?";
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

AgentStream::AgentStream(std::uint64_t seed, std::uint64_t index) noexcept
    : state_(splitmix64_mix(splitmix64_mix(seed + kGolden) ^ (index * kGolden + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t AgentStream::next() noexcept {
  state_ += kGolden;
  return splitmix64_mix(state_);
}

double AgentStream::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double AgentStream::exponential(double lambda) noexcept {
  return -std::log1p(-uniform()) / lambda;
}

Choice choose_contract(AppType own_type, double lambda, const ContractMenu& menu,
                       bool opt_out_allowed, double tie_tol) {
  const Choice own = own_type == AppType::MissionCritical ? Choice::McContract : Choice::NonMcContract;
  const Choice other = own == Choice::McContract ? Choice::NonMcContract : Choice::McContract;
  auto net = [&](Choice c) {
    if (c == Choice::OptOut) return 0.0;
    const Contract k = menu.contract(c == Choice::McContract ? AppType::MissionCritical
                                                             : AppType::NonMissionCritical);
    return reservation_value(k.rebate, lambda) - k.payment;
  };

  const std::array<Choice, 3> order{own, other, Choice::OptOut};
  const std::size_t n_options = opt_out_allowed ? 3 : 2;
  double best = net(order[0]);
  for (std::size_t i = 1; i < n_options; ++i) best = std::max(best, net(order[i]));
  for (std::size_t i = 0; i < n_options; ++i) {
    if (net(order[i]) >= best - tie_tol) return order[i];
  }
  return own;
}

SimReport simulate(const MarketParams& params, const ContractMenu& menu, const SimConfig& config) {
  config.validate();
  menu.validate();
  const std::vector<AgentOutcome> outcomes = run_agents(params, menu, config);

  SimReport rep;
  rep.n_agents = config.n_agents;
  std::uint64_t held_c = 0, held_n = 0, truthful = 0, opted_out = 0;
  double sum = 0.0;
  for (const AgentOutcome& o : outcomes) {
    const bool mc = o.type == AppType::MissionCritical;
    rep.n_mc += mc ? 1 : 0;
    sum += o.profit;
    if (is_own(o)) ++truthful;
    if (o.choice == Choice::OptOut) {
      ++opted_out;
      continue;
    }
    if (mc) {
      ++rep.served_c;
      held_c += o.held ? 1 : 0;
    } else {
      ++rep.served_n;
      held_n += o.held ? 1 : 0;
    }
  }
  const auto n = static_cast<double>(config.n_agents);
  rep.empirical_profit = sum / n;
  if (config.n_agents > 1) {
    double ss = 0.0;
    for (const AgentOutcome& o : outcomes) {
      const double d = o.profit - rep.empirical_profit;
      ss += d * d;
    }
    rep.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  rep.hold_rate_c = rep.served_c ? static_cast<double>(held_c) / static_cast<double>(rep.served_c) : 0.0;
  rep.hold_rate_n = rep.served_n ? static_cast<double>(held_n) / static_cast<double>(rep.served_n) : 0.0;
  rep.truthful_rate = static_cast<double>(truthful) / n;
  rep.opt_out_rate = static_cast<double>(opted_out) / n;
  return rep;
}

double numeric_profit_oracle(const MarketParams& params, const ContractMenu& menu,
                             std::uint64_t steps) {
  if (steps < 100) throw DomainError("numeric_profit_oracle needs at least 100 steps");
  menu.validate();
  if (steps % 2) ++steps;

  // Expected operator outlay for one type: rebate r if the utility falls
  // below r (release), channel cost kappa otherwise (hold).
  auto outlay = [&](double rebate, double lambda) {
    const double kappa = params.kappa();
    auto density = [lambda](double v) { return lambda * std::exp(-lambda * v); };
    auto simpson = [&](double a, double b, auto&& g) {
      if (b <= a) return 0.0;
      const double h = (b - a) / static_cast<double>(steps);
      double acc = g(a) + g(b);
      for (std::uint64_t i = 1; i < steps; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * g(a + h * static_cast<double>(i));
      }
      return acc * h / 3.0;
    };
    const double tail_end = rebate + 60.0 / lambda;
    const double release = simpson(0.0, rebate, [&](double v) { return rebate * density(v); });
    const double hold = simpson(rebate, tail_end, [&](double v) { return kappa * density(v); });
    return release + hold;
  };

  const double profit_c = menu.p_c - outlay(menu.r_c, params.lambda_c());
  const double profit_n = menu.p_n - outlay(menu.r_n, params.lambda_n());
  return params.pi_c() * profit_c + params.pi_n() * profit_n;
}

double ic_empirical_check(const MarketParams& params, const ContractMenu& menu,
                          const SimConfig& config) {
  return simulate(params, menu, config).truthful_rate;
}

}  // namespace specres
