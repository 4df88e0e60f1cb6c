#include "support.hpp"

#include "pcopt/errors.hpp"
#include "pcopt/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace pcopt;
using pcopt::testing::rel;
using pcopt::testing::study_contract;
using pcopt::testing::study_market;
using pcopt::testing::study_spec;

TEST_CASE("payoff utility mixes the alive and dead utilities linearly in epsilon") {
    const auto c = study_contract();
    for (auto kind : {ContractKind::Defaultable, ContractKind::FullyProtected}) {
        const Preferences alive(study_spec(kind, 0.0), c);
        const Preferences dead(study_spec(kind, 1.0), c);
        const Preferences mixed(study_spec(kind, 0.1), c);
        for (double x = 0.0; x < 400.0; x += 3.7) {
            const double expected = 0.9 * payoff_utility(alive, x) + 0.1 * payoff_utility(dead, x);
            CHECK(std::abs(payoff_utility(mixed, x) - expected) <= 1e-12 * (1.0 + std::abs(expected)));
        }
    }
}

TEST_CASE("scenario sets and Monte Carlo estimates") {
    const auto c = study_contract();
    const Preferences p(study_spec(), c);
    const auto law = state_price_law(study_market(), 10.0);
    const ScenarioSet scen(law, 100000, 3);
    CHECK(scen.xi().size() == 100000);
    const ScenarioSet again(law, 100000, 3);
    CHECK(scen.xi() == again.xi());

    const auto flat = mc_expected_utility([&](double) { return c.bonus_threshold; }, p, scen);
    CHECK(flat.utility.std_error == 0.0);
    CHECK(rel(flat.utility.mean, payoff_utility(p, c.bonus_threshold)) < 1e-12);
    CHECK(std::abs(flat.budget.mean - c.bonus_threshold * law.mean()) <= 4.0 * flat.budget.std_error);

    const auto diff = scen.difference([](double xi) { return xi; }, [](double xi) { return xi; });
    CHECK(diff.mean == 0.0);
    CHECK(diff.std_error == 0.0);

    const auto sol = solve(Regime(study_market(), c, study_spec(), Unconstrained{}));
    const auto est = mc_expected_utility(sol, 200000, 11);
    CHECK(std::abs(est.budget.mean - 100.0) <= 4.0 * est.budget.std_error);
    const double quad = expected_utility_quadrature(sol.profile, law);
    CHECK(std::abs(est.utility.mean - quad) <= 4.0 * est.utility.std_error);
    CHECK_THROWS_AS((void)mc_expected_utility(sol, 100, 11), InvalidArgument);
}

TEST_CASE("a slack VaR constraint leaves the Lagrangian unchanged") {
    const auto c = study_contract();
    const Regime free(study_market(), c, study_spec(), Unconstrained{});
    const Regime slack(study_market(), c, study_spec(), VaRConstraint{0.2});
    const auto sol = solve(slack);
    CHECK(!sol.binding);
    CHECK(sol.lambda2 == 0.0);
    for (double xi : xi_grid(slack.law(), 50))
        for (double x : {0.0, 30.0, c.guarantee + 1.0, c.bonus_threshold, 300.0})
            CHECK(lagrangian(slack, sol.lambda, xi, x) == lagrangian(free, sol.lambda, xi, x));
}

TEST_CASE("brute force picks the bonus region in good states and the floor in bad ones") {
    const auto c = study_contract();
    const Regime regime(study_market(), c, study_spec(), Unconstrained{});
    const auto sol = solve(regime);
    CHECK(brute_force_argmax(regime, sol.lambda, 1e-3) > c.bonus_threshold);
    CHECK(brute_force_argmax(regime, sol.lambda, 1e3) == 0.0);
    const Regime pi(study_market(), c, study_spec(), PortfolioInsurance{10.0});
    CHECK(lagrangian(pi, sol.lambda, 1.0, 5.0) == -std::numeric_limits<double>::infinity());
    CHECK(brute_force_argmax(pi, sol.lambda, 1e3) == 10.0);
}

TEST_CASE("dominance point and evaluation grid") {
    const auto law = state_price_law(study_market(), 10.0);
    const auto grid = xi_grid(law, 101);
    CHECK(grid.size() == 101);
    CHECK(rel(law.cdf(grid.front()), 1e-4) < 1e-9);
    CHECK(rel(law.sf(grid.back()), 1e-4) < 1e-9);
    const auto c = study_contract();
    const auto var = solve(Regime(study_market(), c, study_spec(), VaRConstraint{0.025}));
    const auto free = solve(Regime(study_market(), c, study_spec(), Unconstrained{}));
    const auto star = dominance_xi_star(var.profile, free.profile, grid);
    REQUIRE(star.has_value());
    CHECK(*star <= *var.xi_bar);
    CHECK(var.profile(*star) >= free.profile(*star));
}

TEST_CASE("verification passes for solved regimes and catches perturbed ones") {
    const auto c = study_contract();
    const VerifyOptions opts{.mc_paths = 100000, .seed = 21, .oracle_points = 300};
    for (const ConstraintSpec& k : {ConstraintSpec{Unconstrained{}}, ConstraintSpec{VaRConstraint{0.025}},
                                    ConstraintSpec{PortfolioInsurance{0.2 * c.guarantee}}}) {
        const auto sol = solve(Regime(study_market(), c, study_spec(), k));
        const auto report = run_verification(sol, opts);
        INFO(report.first_failure().value_or(""));
        CHECK(report.passed());
        CHECK(report.max_lagrangian_gap <= 1e-8);
        CHECK(!report.competitors.empty());
    }
    const auto bent = solve(Regime(study_market(), c, study_spec(), Unconstrained{}), 1.5);
    const auto report = run_verification(bent, opts);
    CHECK(!report.passed());
}
