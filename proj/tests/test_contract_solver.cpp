#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specres/contract_solver.hpp"

using namespace specres;

namespace {

// Residual of the stationarity condition written out independently of the
// library: kappa + pi_c (e^{(ln - lc) r} - 1) / (pi_n ln) - r.
double psi(double lc, double ln, double pi_c, double kappa, double r) {
  return kappa + pi_c * (std::exp((ln - lc) * r) - 1.0) / ((1.0 - pi_c) * ln) - r;
}

// Relaxed objective reconstructed from the integral-form profit with the
// binding payments computed by the 2x2 oracle (r_c terms dropped).
double relaxed_by_quadrature(double lc, double ln, double pi_c, double kappa, double r_n) {
  const auto [p_c, p_n] = oracle::binding_payments(lc, ln, kappa, r_n);
  const double total = oracle::profit(lc, ln, pi_c, kappa, p_c, kappa, p_n, r_n);
  // Remove the r_c-only part: pi_c e^{-lc kappa} / lc, plus constant terms.
  return total - pi_c * std::exp(-lc * kappa) / lc;
}

MarketParams random_params(oracle::Rng& rng) {
  const double ln = rng.uniform(0.1, 4.0);
  const double lc = rng.uniform(0.02, 0.98) * ln;
  return {lc, ln, rng.uniform(0.01, 0.95), rng.uniform(0.0, 2.0)};
}

}  // namespace

TEST_CASE("rebate_mc is the average channel cost") {
  CHECK(rebate_mc(MarketParams::base()) == 0.1);
  CHECK(rebate_mc(MarketParams::base().with_kappa(0.0)) == 0.0);
  CHECK(rebate_mc(MarketParams::base().with_kappa(2.5)) == 2.5);
}

TEST_CASE("rebate_mc maximizes the MC part of the relaxed objective") {
  // J(r) = pi_c e^{-lc r} (1/lc + r - kappa), scanned on a dense grid.
  for (double kappa : {0.0, 0.1, 0.7, 2.5}) {
    auto J = [kappa](double r) { return 0.2 * std::exp(-0.2 * r) * (5.0 + r - kappa); };
    CHECK(std::abs(oracle::grid_argmax(J, 0.0, 10.0, 100000) - kappa) <= 1e-4);
  }
}

TEST_CASE("rebate_nonmc_closed_form") {
  const MarketParams base = MarketParams::base();
  CHECK(std::abs(rebate_nonmc_closed_form(base) - std::log(5.0)) < 1e-15);
  CHECK(std::abs(existence_threshold(base) - 1.0 / 1.8) < 1e-15);

  CHECK(std::abs(rebate_nonmc_closed_form(base.with_pi_c(existence_threshold(base)))) < 1e-12);

  try {
    rebate_nonmc_closed_form(base.with_pi_c(0.6));
    FAIL("expected ExistenceViolated");
  } catch (const SolveError& e) {
    CHECK(e.kind() == SolveErrorKind::ExistenceViolated);
    CHECK(e.threshold() == doctest::Approx(0.5555555556));
  }
  try {
    rebate_nonmc_closed_form(MarketParams(1.0, 1.0, 0.2, 0.1));
    FAIL("expected TypesIndistinguishable");
  } catch (const SolveError& e) {
    CHECK(e.kind() == SolveErrorKind::TypesIndistinguishable);
  }
  for (double pi : {0.0, 1.0}) {
    try {
      rebate_nonmc_closed_form(base.with_pi_c(pi));
      FAIL("expected DegenerateMarket");
    } catch (const SolveError& e) {
      CHECK(e.kind() == SolveErrorKind::DegenerateMarket);
    }
  }
}

TEST_CASE("rebate_nonmc_fixed_points agrees with an independent scan") {
  const MarketParams base = MarketParams::base();
  const auto roots = rebate_nonmc_fixed_points(base, 10.0);
  const auto ref = oracle::scan_roots([](double r) { return psi(0.2, 1.0, 0.2, 0.1, r); }, 0.0, 10.0, 997);
  REQUIRE(roots.size() == 2);
  REQUIRE(ref.size() == 2);
  CHECK(std::abs(roots[0] - ref[0]) < 1e-10);
  CHECK(std::abs(roots[1] - ref[1]) < 1e-10);
  CHECK(std::abs(roots[0] - 0.126659858739405) < 1e-10);
  CHECK(std::abs(roots[1] - 3.26987177263880) < 1e-10);

  SUBCASE("zero cost makes zero a root") {
    const auto r = rebate_nonmc_fixed_points(base.with_kappa(0.0), 10.0);
    REQUIRE_FALSE(r.empty());
    CHECK(r.front() == 0.0);
  }
  SUBCASE("no MC mass leaves the single root kappa") {
    const auto r = rebate_nonmc_fixed_points(base.with_pi_c(0.0), 10.0);
    REQUIRE(r.size() == 1);
    CHECK(std::abs(r[0] - 0.1) < 1e-12);
  }
  SUBCASE("empty when the bound excludes every root") {
    CHECK(rebate_nonmc_fixed_points(base, 0.05).empty());
  }
  CHECK_THROWS_AS(rebate_nonmc_fixed_points(base, 0.0), DomainError);
}

TEST_CASE("relaxed objective matches its quadrature reconstruction") {
  for (double r : {0.0, 0.1266, 1.0, std::log(5.0), 4.0}) {
    CHECK(std::abs(relaxed_objective(MarketParams::base(), r) - relaxed_by_quadrature(0.2, 1.0, 0.2, 0.1, r)) <
          1e-9);
  }
}

TEST_CASE("rebate_nonmc_numeric") {
  const MarketParams base = MarketParams::base();
  auto H = [&](double r) { return relaxed_objective(base, r); };

  SUBCASE("r_max = 10: interior optimum is global") {
    const auto res = rebate_nonmc_numeric(base, 10.0);
    REQUIRE(res.interior.has_value());
    CHECK(std::abs(*res.interior - 0.126659858739405) < 1e-9);
    CHECK(std::abs(H(*res.interior) - (-0.0751623144120010)) < 1e-12);
    CHECK(std::abs(H(10.0) - (-0.134930315863131)) < 1e-12);
    CHECK_FALSE(res.boundary_flag);
    CHECK(res.maximizer == *res.interior);
    const double grid = oracle::grid_argmax(H, 0.0, 10.0, 1000000);
    CHECK(std::abs(grid - res.maximizer) < 2e-5);
  }
  SUBCASE("default r_max: boundary dominates the interior candidate") {
    const auto res = rebate_nonmc_numeric(base, default_r_max(base));
    REQUIRE(res.interior.has_value());
    CHECK(std::abs(*res.interior - 0.126659858739405) < 1e-9);
    CHECK(res.boundary_flag);
    CHECK(res.maximizer == default_r_max(base));
    CHECK(res.chosen() == *res.interior);
    CHECK(oracle::grid_argmax(H, 0.0, 50.0, 1000000) == doctest::Approx(50.0));
  }
  SUBCASE("no MC mass: maximizer is kappa") {
    const MarketParams p = base.with_pi_c(0.0);
    const auto res = rebate_nonmc_numeric(p, 10.0);
    CHECK(std::abs(res.maximizer - 0.1) < 1e-12);
    CHECK_FALSE(res.boundary_flag);
    const double grid = oracle::grid_argmax([&](double r) { return relaxed_objective(p, r); }, 0.0, 10.0, 100000);
    CHECK(std::abs(grid - 0.1) < 1e-4);
  }
  SUBCASE("bound below every critical point: two-point comparison") {
    const auto res = rebate_nonmc_numeric(base, 0.05);
    CHECK_FALSE(res.interior.has_value());
    CHECK(res.maximizer == (H(0.05) > H(0.0) ? 0.05 : 0.0));
  }
  SUBCASE("zero cost: H decreasing away from the root at 0") {
    const MarketParams p = base.with_kappa(0.0).with_pi_c(0.05);
    const auto res = rebate_nonmc_numeric(p, 0.01);
    CHECK(res.maximizer == (relaxed_objective(p, 0.01) > relaxed_objective(p, 0.0) ? 0.01 : 0.0));
  }
}

TEST_CASE("advance_payments match the binding-constraint solve") {
  const MarketParams base = MarketParams::base();
  const auto [p_c, p_n] = advance_payments(base, 0.1, std::log(5.0));
  const auto [o_c, o_n] = oracle::binding_payments(0.2, 1.0, 0.1, std::log(5.0));
  CHECK(std::abs(p_n - o_n) < 1e-10);
  CHECK(std::abs(p_c - o_c) < 1e-10);
  CHECK(std::abs(p_n - 1.80943791243410037) < 1e-14);
  CHECK(std::abs(p_c - 1.57709504814529885) < 1e-13);

  const auto [q_c, q_n] = advance_payments(base, 0.7, 0.7);
  CHECK(q_c == doctest::Approx(0.7 + std::exp(-0.7)));
  CHECK(q_n == doctest::Approx(0.7 + std::exp(-0.7)));

  const auto [z_c, z_n] = advance_payments(base, 0.0, 0.0);
  CHECK(z_c == doctest::Approx(1.0));
  CHECK(z_n == doctest::Approx(1.0));
}

TEST_CASE("verify_ic_nc") {
  const MarketParams base = MarketParams::base();
  CHECK(verify_ic_nc(base, 0.4, 0.4) == 0.0);
  const double v = verify_ic_nc(base, 0.1, std::log(5.0));
  CHECK(std::abs(v - 0.572257630109339) < 1e-12);
  const auto [p_c, p_n] = advance_payments(base, 0.1, std::log(5.0));
  CHECK(std::abs(v - constraint_slacks(base, {p_c, 0.1, p_n, std::log(5.0)}).ic_nc_slack) < 1e-12);

  oracle::Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const double ln = rng.uniform(0.05, 5.0);
    const double lc = rng.uniform(0.01, 0.999) * ln;
    const double r_c = rng.uniform(0.0, 5.0);
    const double r_n = r_c + rng.uniform(1e-6, 5.0);
    CHECK(verify_ic_nc(MarketParams(lc, ln, 0.3, 0.1), r_c, r_n) > 0.0);
  }
}

TEST_CASE("first_best") {
  const MarketParams base = MarketParams::base();
  const ContractMenu fb = first_best(base);
  CHECK(fb.r_c == 0.1);
  CHECK(fb.r_n == 0.1);
  CHECK(std::abs(fb.p_c - 5.00099336653377651) < 1e-13);
  CHECK(std::abs(fb.p_n - 1.00483741803595957) < 1e-13);

  // Per-type full-extraction profit is maximized at r = kappa.
  for (double lambda : {0.2, 1.0}) {
    auto per_type = [lambda](double r) {
      return oracle::reservation_value(r, lambda) - r + std::exp(-lambda * r) * (r - 0.1);
    };
    CHECK(std::abs(oracle::grid_argmax(per_type, 0.0, 3.0, 3000) - 0.1) <= 1e-3);
  }

  const ContractMenu zero = first_best(base.with_kappa(0.0));
  CHECK(zero.p_c == doctest::Approx(5.0));
  CHECK(zero.p_n == doctest::Approx(1.0));

  oracle::Rng rng(22);
  for (int i = 0; i < 500; ++i) {
    const MarketParams p = random_params(rng);
    const SolveResult s = solve(p, SolveMode::Numerical);
    CHECK(operator_profit(p, first_best(p)) >= s.profit - 1e-12);
  }
}

TEST_CASE("solve at the base instance") {
  const MarketParams base = MarketParams::base();
  SUBCASE("closed-form mode") {
    const SolveResult r = solve(base, SolveMode::PaperFaithful);
    CHECK(r.menu.r_c == 0.1);
    CHECK(std::abs(r.menu.r_n - std::log(5.0)) < 1e-12);
    CHECK(std::abs(r.menu.p_n - 1.80943791243410037) < 1e-12);
    CHECK(std::abs(r.menu.p_c - 1.57709504814529885) < 1e-12);
    CHECK(std::abs(r.profit - 0.696929075618516) < 1e-12);
    CHECK(r.existence_ok);
    CHECK(r.feasible());
    CHECK(r.r_n_candidates.size() == 2);
    CHECK(r.boundary_flag);
    REQUIRE(r.closed_form_r_n.has_value());
    CHECK(std::abs(r.numeric_r_n - 0.126659858739405) < 1e-9);
  }
  SUBCASE("numerical") {
    const SolveResult r = solve(base, SolveMode::Numerical);
    CHECK(std::abs(r.menu.r_n - 0.126659858739405) < 1e-9);
    CHECK(r.boundary_flag);
    CHECK(r.feasible());
    CHECK(r.r_max == 50.0);
  }
  SUBCASE("existence violated") {
    CHECK_THROWS_AS(solve(base.with_pi_c(0.6), SolveMode::PaperFaithful), SolveError);
    const SolveResult r = solve(base.with_pi_c(0.6), SolveMode::Numerical);
    CHECK_FALSE(r.existence_ok);
    CHECK(r.feasible());
  }
  SUBCASE("indistinguishable types") {
    const MarketParams same(1.0, 1.0, 0.3, 0.2);
    CHECK_THROWS_AS(solve(same, SolveMode::PaperFaithful), SolveError);
    const SolveResult r = solve(same, SolveMode::Numerical);
    CHECK(std::abs(r.menu.r_n - 0.2) < 1e-12);
    CHECK(r.feasible());
  }
}

TEST_CASE("degenerate markets fall back to the single-type menu") {
  const MarketParams base = MarketParams::base();
  for (SolveMode mode : {SolveMode::PaperFaithful, SolveMode::Numerical}) {
    const SolveResult none = solve(base.with_pi_c(0.0), mode);
    CHECK(none.degenerate);
    CHECK(none.menu.r_n == 0.1);
    CHECK(none.menu.p_n == doctest::Approx(reservation_value(0.1, 1.0)));
    CHECK(none.profit == doctest::Approx(operator_profit(base.with_pi_c(0.0), first_best(base))));
    CHECK(none.feasible());

    const SolveResult all = solve(base.with_pi_c(1.0), mode);
    CHECK(all.degenerate);
    CHECK(all.menu.r_c == 0.1);
    CHECK(std::abs(all.menu.p_c - reservation_value(0.1, 0.2)) < 1e-3);
    CHECK(all.feasible());
  }
}

TEST_CASE("solver invariants over random instances") {
  oracle::Rng rng(23);
  int closed_form_checked = 0;
  for (int i = 0; i < 400; ++i) {
    const MarketParams p = random_params(rng);
    for (SolveMode mode : {SolveMode::PaperFaithful, SolveMode::Numerical}) {
      SolveResult r;
      try {
        r = solve(p, mode);
      } catch (const SolveError& e) {
        CHECK(mode == SolveMode::PaperFaithful);
        CHECK(e.kind() == SolveErrorKind::ExistenceViolated);
        CHECK(p.pi_c() > existence_threshold(p));
        continue;
      }
      CHECK(r.menu.r_c == p.kappa());
      CHECK(std::abs(r.constraints.ir_n_slack) <= 1e-9);
      CHECK(std::abs(r.constraints.ic_cn_slack) <= 1e-9);
      if (mode == SolveMode::Numerical) {
        CHECK(r.feasible());
      } else if (r.menu.r_n >= r.menu.r_c) {
        // The printed closed form can fall below kappa; IC_nc only holds above it.
        ++closed_form_checked;
        CHECK(r.feasible());
      }
    }

    const double r_max = default_r_max(p);
    const auto roots = rebate_nonmc_fixed_points(p, r_max);
    for (double r : roots) CHECK(std::abs(fixed_point_residual(p, r)) <= 1e-9);
    const auto numeric = rebate_nonmc_numeric(p, r_max);
    if (numeric.interior) {
      bool member = false;
      for (double r : roots) member = member || std::abs(r - *numeric.interior) <= 1e-8;
      CHECK(member);
    }
    // Same roots from the independent scan (when they are not tangential).
    const auto ref = oracle::scan_roots(
        [&](double r) { return psi(p.lambda_c(), p.lambda_n(), p.pi_c(), p.kappa(), r); }, 0.0, r_max, 1499);
    if (ref.size() == roots.size()) {
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(ref[k] - roots[k]) <= 1e-8);
    }
  }
  CHECK(closed_form_checked > 50);
}

TEST_CASE("kappa sweep structure") {
  const MarketParams base = MarketParams::base();
  const SolveResult ref = solve(base.with_kappa(0.0), SolveMode::PaperFaithful);
  const double h = 1e-4;
  for (int i = 0; i <= 100; ++i) {
    const double k = 0.01 * i;
    const SolveResult r = solve(base.with_kappa(k), SolveMode::PaperFaithful);
    CHECK(r.menu.r_c == k);
    CHECK(r.menu.r_n == ref.menu.r_n);
    CHECK(r.menu.p_n == ref.menu.p_n);
    if (k >= h) {
      const double up = solve(base.with_kappa(k + h), SolveMode::PaperFaithful).menu.p_c;
      const double down = solve(base.with_kappa(k - h), SolveMode::PaperFaithful).menu.p_c;
      CHECK(std::abs((up - down) / (2 * h) - (1.0 - std::exp(-0.2 * k))) < 1e-6);
      CHECK(up > down);
    }
  }
}

TEST_CASE("pi_c and lambda_c sweep structure") {
  const MarketParams base = MarketParams::base();
  const double hi = existence_threshold(base);
  SolveResult prev = solve(base.with_pi_c(hi / 200.0), SolveMode::PaperFaithful);
  for (int i = 2; i < 200; ++i) {
    const double pi = hi * i / 200.0;
    const SolveResult r = solve(base.with_pi_c(pi), SolveMode::PaperFaithful);
    CHECK(r.menu.p_c < prev.menu.p_c);
    CHECK(r.menu.p_n < prev.menu.p_n);
    CHECK(r.menu.r_n < prev.menu.r_n);
    prev = r;
  }
  prev = solve(base.with_lambda_c(0.005), SolveMode::PaperFaithful);
  for (int i = 2; i < 200; ++i) {
    const double lc = 0.005 * i;
    const SolveResult r = solve(base.with_lambda_c(lc), SolveMode::PaperFaithful);
    CHECK(r.menu.r_n > prev.menu.r_n);
    CHECK(r.menu.p_n > prev.menu.p_n);
    prev = r;
  }
}

TEST_CASE("solve mode parsing") {
  CHECK(parse_solve_mode("paper") == SolveMode::PaperFaithful);
  CHECK(parse_solve_mode("numerical") == SolveMode::Numerical);
  CHECK_THROWS_AS(parse_solve_mode("auction"), DomainError);
}
