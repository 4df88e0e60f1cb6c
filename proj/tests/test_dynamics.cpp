#include "support.hpp"

#include "pcopt/dynamics.hpp"
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

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Solution with_profile(WealthProfile profile) {
    const double lambda = profile.lambda();
    return Solution{.profile = std::move(profile),
                    .lambda = lambda,
                    .lambda2 = 0.0,
                    .case_class = std::nullopt,
                    .binding = false,
                    .constraint = Unconstrained{},
                    .thresholds = {},
                    .xi_bar = std::nullopt,
                    .market = study_market(),
                    .diagnostics = {}};
}

}  // namespace

TEST_CASE("constant terminal wealth is a bond") {
    const auto c = study_contract();
    const Preferences p(study_spec(), c);
    const auto sol = with_profile(WealthProfile::build(p, 0.1, 0.0, {{SegmentKind::ConstantTildeL, kInf}}));
    for (double t : {0.0, 3.0, 9.5})
        for (double xi : {0.3, 1.0, 4.0}) {
            CHECK(rel(wealth_at(sol, study_market(), t, xi), c.bonus_threshold * std::exp(-0.03 * (10.0 - t))) < 1e-13);
            CHECK(strategy_at(sol, study_market(), t, xi) == doctest::Approx(0.0).epsilon(1e-12));
        }
}

TEST_CASE("guarantee plus power profile holds the Merton proportion above the bond") {
    const auto c = study_contract();
    const auto m = study_market();
    const Preferences p(study_spec(), c);
    const auto sol = with_profile(WealthProfile::build(p, 0.1, 0.0, {{SegmentKind::GuaranteePlusInv, kInf}}));
    for (double t : {0.0, 5.0, 9.0})
        for (double xi : {0.5, 1.0, 2.0}) {
            const double bond = c.guarantee * std::exp(-m.r * (10.0 - t));
            const double x = wealth_at(sol, m, t, xi);
            const double merton = m.theta() / (m.sigma * 0.5);
            CHECK(rel(strategy_at(sol, m, t, xi), merton * (x - bond)) < 1e-12);
        }
}

TEST_CASE("wealth starts at the budget and approaches the terminal profile") {
    const auto m = study_market();
    for (const ConstraintSpec& k : {ConstraintSpec{Unconstrained{}}, ConstraintSpec{VaRConstraint{0.025}}}) {
        const auto sol = solve(Regime(m, study_contract(), study_spec(), k));
        CHECK(rel(wealth_at(sol, m, 0.0, 1.0), 100.0) < 1e-9);
        for (double xi : {0.3, 0.6, 1.2, 2.5}) {
            bool near_break = false;
            for (double b : sol.profile.breakpoints()) near_break |= std::abs(std::log(xi / b)) < 0.05;
            if (near_break) continue;
            CHECK(rel(wealth_at(sol, m, 10.0 - 1e-8, xi), sol.profile(xi)) < 1e-6);
        }
        CHECK_THROWS_AS((void)wealth_at(sol, m, 10.0, 1.0), InvalidArgument);
        CHECK_THROWS_AS((void)wealth_at(sol, m, 1.0, 0.0), InvalidArgument);
    }
}

TEST_CASE("analytic and finite-difference strategies agree and are non-negative") {
    const auto m = study_market();
    const auto c = study_contract();
    for (auto kind : {ContractKind::Defaultable, ContractKind::FullyProtected})
        for (double eps : {0.0, 0.1}) {
            const auto sol = solve(Regime(m, c, study_spec(kind, eps), Unconstrained{}));
            for (double t : {1.0, 5.0, 8.0, 9.9}) {
                double prev_x = kInf;
                for (double xi : xi_grid(state_price_law(m, t), 60)) {
                    const auto s = snapshot(sol, m, t, xi);
                    const double fd = strategy_fd(sol, m, t, xi);
                    CHECK(std::abs(s.risky_amount - fd) <= 1e-3 * std::abs(fd) + 1e-9);
                    CHECK(s.risky_amount >= 0.0);
                    CHECK(s.wealth <= prev_x);
                    prev_x = s.wealth;
                }
            }
        }
}

TEST_CASE("deflated wealth is a martingale") {
    const auto m = study_market();
    const auto sol = solve(Regime(m, study_contract(), study_spec(), VaRConstraint{0.025}));
    for (double t : {2.0, 6.0}) {
        const ScenarioSet scen(state_price_law(m, t), 20000, 17);
        const auto est = scen.mean([&](double xi) { return xi * wealth_at(sol, m, t, xi); });
        CHECK(std::abs(est.mean - 100.0) <= 4.0 * est.std_error);
    }
}

TEST_CASE("defaultable strategy peaks inside the loss region at t = 8") {
    const auto m = study_market();
    const auto c = study_contract();
    const auto sol = solve(Regime(m, c, study_spec(ContractKind::Defaultable), Unconstrained{}));
    const auto grid = xi_grid(state_price_law(m, 8.0), 400);
    std::size_t best = 0;
    double best_pi = -1.0;
    std::vector<double> pis, xs;
    for (double xi : grid) {
        const auto s = snapshot(sol, m, 8.0, xi);
        xs.push_back(s.wealth);
        pis.push_back(s.risky_amount);
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (xs[i] < c.guarantee && pis[i] > best_pi) {
            best_pi = pis[i];
            best = i;
        }
    REQUIRE(best_pi > 0.0);
    CHECK(best + 1 < grid.size());
    CHECK(xs[best + 1] < xs[best]);
    CHECK(pis[best + 1] < pis[best]);
    CHECK(xs[best - 1] < c.guarantee);
    CHECK(pis[best - 1] < pis[best]);
}

TEST_CASE("replication along simulated paths") {
    const auto m = study_market();
    const auto sol = solve(Regime(m, study_contract(), study_spec(), Unconstrained{}));
    const auto a = simulate_paths(sol, m, 300, 400, 5);
    const auto b = simulate_paths(sol, m, 300, 400, 5);
    CHECK(a.rmse == b.rmse);
    CHECK(a.relative_rmse < 0.05);
    CHECK(a.min_risky_amount >= 0.0);
    CHECK(std::abs(a.mean_terminal - a.mean_target) < 0.05 * a.mean_target);
    const auto coarse = simulate_paths(sol, m, 300, 100, 5, 1.0);
    const auto fine = simulate_paths(sol, m, 300, 100, 5, 2.0);
    CHECK(fine.relative_rmse < coarse.relative_rmse);
    CHECK_THROWS_AS((void)simulate_paths(sol, m, 0, 10, 1), InvalidArgument);
    CHECK_THROWS_AS((void)simulate_paths(sol, m, 10, 10, 1, 0.5), InvalidArgument);
}
