#include "support.hpp"

#include "pcopt/errors.hpp"
#include "pcopt/solver.hpp"
#include "pcopt/verify.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>

using namespace pcopt;
using pcopt::testing::rel;
using pcopt::testing::study_contract;
using pcopt::testing::study_market;
using pcopt::testing::study_spec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const boost::math::normal_distribution<double> kStd;

double lognormal_moment(const StatePriceLaw& law, double a) {
    return std::exp(a * law.log_mean + 0.5 * a * a * law.log_sd * law.log_sd);
}

// E[xi X(xi)] by integrating the profile against the lognormal density in log coordinates,
// split at every breakpoint.
double budget_by_quadrature(const WealthProfile& w, const StatePriceLaw& law) {
    const double m = law.log_mean, s = law.log_sd;
    std::vector<double> cuts{m - 40.0 * s};
    for (double b : w.breakpoints())
        if (std::log(b) > cuts.front() && std::log(b) < m + 40.0 * s) cuts.push_back(std::log(b));
    cuts.push_back(m + 40.0 * s);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto f = [&](double x) {
            const double xi = std::exp(x);
            return xi * w(xi) * boost::math::pdf(kStd, (x - m) / s) / s;
        };
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 30, 1e-13);
    }
    return total;
}

std::vector<Regime> regimes_under_test() {
    std::vector<Regime> out;
    const auto c = study_contract();
    for (auto kind : {ContractKind::Defaultable, ContractKind::FullyProtected})
        for (double eps : {0.0, 0.1, 1.0})
            for (const ConstraintSpec& k : {ConstraintSpec{Unconstrained{}}, ConstraintSpec{VaRConstraint{0.025}},
                                            ConstraintSpec{PortfolioInsurance{0.2 * c.guarantee}}})
                out.emplace_back(study_market(), c, study_spec(kind, eps), k);
    return out;
}

}  // namespace

TEST_CASE("budget cost closed forms") {
    const auto c = study_contract();
    const Preferences p(study_spec(), c);
    const auto law = state_price_law(study_market(), 10.0);
    const double lambda = 0.12;

    const auto flat = WealthProfile::build(p, lambda, 0.0, {{SegmentKind::ConstantTildeL, kInf}});
    CHECK(rel(budget_cost(flat, law), c.bonus_threshold * std::exp(-0.3)) < 1e-13);

    const auto li = WealthProfile::build(p, lambda, 0.0, {{SegmentKind::GuaranteePlusInv, kInf}});
    const double expected = c.guarantee * std::exp(-0.3) + std::pow(lambda, -2.0) * lognormal_moment(law, -1.0);
    CHECK(rel(budget_cost(li, law), expected) < 1e-12);

    const auto split = WealthProfile::build(p, lambda, 0.0,
                                            {{SegmentKind::GuaranteePlusInv, 1.0}, {SegmentKind::Zero, kInf}});
    const double s = law.log_sd, m = law.log_mean;
    const double d = (0.0 - m) / s;
    const double part = c.guarantee * std::exp(m + 0.5 * s * s) * boost::math::cdf(kStd, d - s) +
                        std::pow(lambda, -2.0) * lognormal_moment(law, -1.0) * boost::math::cdf(kStd, d + s);
    CHECK(rel(budget_cost(split, law), part) < 1e-12);
}

TEST_CASE("budget cost agrees across closed form, built-in quadrature and an external integral") {
    for (const auto& regime : regimes_under_test()) {
        const auto sol = solve(regime);
        const auto& w = sol.profile;
        const double a = budget_cost(w, regime.law(), ExpectationMethod::Auto);
        const double b = budget_cost(w, regime.law(), ExpectationMethod::Quadrature);
        CHECK(rel(a, b) < 1e-9);
        CHECK(rel(a, budget_by_quadrature(w, regime.law())) < 1e-8);
        CHECK(rel(a, regime.contract().x0) < 1e-9);
    }
}

TEST_CASE("analytic delta matches a numerical derivative in the scale") {
    for (const auto& regime : regimes_under_test()) {
        const auto sol = solve(regime);
        const auto law = state_price_law(study_market(), 2.0);
        for (double scale : {0.5, 1.0, 2.0}) {
            const auto dv = discounted_value(sol.profile, law, scale, true);
            const double h = 1e-5;
            const double up = discounted_value(sol.profile, law, scale * std::exp(h), false).value;
            const double dn = discounted_value(sol.profile, law, scale * std::exp(-h), false).value;
            const double fd = (up - dn) / (2 * h);
            CHECK(std::abs(dv.delta - fd) <= 1e-5 * (1.0 + std::abs(fd)));
        }
    }
}

TEST_CASE("budget cost decreases in lambda") {
    for (const auto& regime : regimes_under_test()) {
        double prev = kInf;
        for (double lx = -4.0; lx <= 2.0; lx += 0.25) {
            const double cost = budget_cost(regime.profile(std::pow(10.0, lx)), regime.law());
            CHECK(cost <= prev * (1 + 1e-12));
            prev = cost;
        }
    }
}

TEST_CASE("pointwise argmax reproduces the profile and the Lagrangian oracle") {
    for (const auto& regime : regimes_under_test()) {
        const auto sol = solve(regime);
        for (double xi : xi_grid(regime.law(), 200)) {
            const double x = pointwise_argmax(regime, sol.lambda, xi);
            CHECK(rel(x + 1.0, sol.profile(xi) + 1.0) < 1e-10);
            CHECK(lagrangian_gap(regime, sol.lambda, xi) <= 1e-8);
        }
    }
}

TEST_CASE("VaR multiplier agrees with the advantage at the quantile") {
    const auto c = study_contract();
    const Regime regime(study_market(), c, study_spec(), VaRConstraint{0.025});
    const Regime free(study_market(), c, study_spec(), Unconstrained{});
    for (double lx = -2.0; lx <= 1.0; lx += 0.1) {
        const double lambda = std::pow(10.0, lx);
        const double xb = *regime.xi_bar();
        const double expected = regime.binding(lambda) ? std::max(0.0, -free.advantage(lambda, xb)) : 0.0;
        CHECK(std::abs(lambda2(regime, lambda) - expected) <= 1e-12 * (1 + expected));
        CHECK(regime.binding(lambda) == (free.floor_start(lambda) < xb));
    }
    // Smaller beta pushes the quantile further out and needs a larger multiplier.
    double prev = -1.0;
    for (double beta : {0.03, 0.02, 0.01, 0.005, 0.001}) {
        const auto sol = solve(Regime(study_market(), c, study_spec(), VaRConstraint{beta}));
        REQUIRE(sol.binding);
        CHECK(sol.lambda2 > prev);
        prev = sol.lambda2;
    }
}

TEST_CASE("no bonus plateau without participation") {
    const auto c = study_contract(std::nullopt, 0.0);
    const auto sol = solve(Regime(study_market(), c, study_spec(), Unconstrained{}));
    for (auto k : sol.profile.segments()) CHECK(k != SegmentKind::ConstantTildeL);
}

TEST_CASE("epsilon = 1 gives the guarantee-plus-inverse profile for both designs") {
    const auto c = study_contract();
    for (const ConstraintSpec& k :
         {ConstraintSpec{Unconstrained{}}, ConstraintSpec{VaRConstraint{0.025}}}) {
        const auto a = solve(Regime(study_market(), c, study_spec(ContractKind::Defaultable, 1.0), k));
        const auto b = solve(Regime(study_market(), c, study_spec(ContractKind::FullyProtected, 1.0), k));
        CHECK(a.profile.segments() == std::vector<SegmentKind>{SegmentKind::GuaranteePlusInv, SegmentKind::Zero});
        CHECK(a.profile.segments() == b.profile.segments());
        CHECK(a.lambda == b.lambda);
        for (double xi : xi_grid(state_price_law(study_market(), 10.0), 500))
            CHECK(std::abs(a.profile(xi) - b.profile(xi)) <= 1e-10 * c.x0);
    }
}

TEST_CASE("default probabilities by regime") {
    const auto c = study_contract();
    const auto law = state_price_law(study_market(), 10.0);

    const auto var = solve(Regime(study_market(), c, study_spec(), VaRConstraint{0.025}));
    REQUIRE(var.binding);
    CHECK(std::abs(default_probability(var, law) - 0.025) < 1e-12);
    CHECK(var.profile.breakpoints().back() == doctest::Approx(*var.xi_bar).epsilon(1e-14));

    const auto four = solve(Regime(study_market(), c, study_spec(ContractKind::FullyProtected, 0.1), Unconstrained{}));
    REQUIRE(four.case_class == CaseClass::FourRegion);
    CHECK(rel(default_probability(four, law), law.sf(four.thresholds.loss_start())) < 1e-12);

    const double floor = 0.2 * c.guarantee;
    const auto pi = solve(Regime(study_market(), c, study_spec(), PortfolioInsurance{floor}));
    double lowest = kInf;
    for (double xi : xi_grid(law, 2000, 1e-8)) lowest = std::min(lowest, pi.profile(xi));
    CHECK(lowest == floor);
    CHECK(pi.profile(1e6) == floor);

    const auto full = solve(Regime(study_market(), c, study_spec(), PortfolioInsurance{c.guarantee}));
    CHECK(default_probability(full, law) == 0.0);
    CHECK(!full.case_class.has_value());
}

TEST_CASE("gamma above one") {
    const auto c = study_contract();
    const auto sol = solve(Regime(study_market(), c, study_spec(ContractKind::Defaultable, 0.0, 2.0), Unconstrained{}));
    CHECK(sol.diagnostics.budget_residual <= 1e-9);
    CHECK(sol.case_class == CaseClass::FourRegion);
    CHECK(sol.diagnostics.default_probability == 0.0);
}

TEST_CASE("infeasible and degenerate inputs") {
    const auto c = study_contract();
    CHECK_THROWS_AS((void)solve(Regime(study_market(), c, study_spec(), PortfolioInsurance{c.x0 * std::exp(0.3)})),
                    InfeasibleBudget);
    CHECK_THROWS_AS((void)solve(Regime(study_market(), c, study_spec(), PortfolioInsurance{2.0 * c.x0 * std::exp(0.3)})),
                    InfeasibleBudget);
    MarketParams flat = study_market();
    flat.mu = flat.r;
    CHECK_THROWS_AS((void)Regime(flat, c, study_spec(), Unconstrained{}), DegenerateMarket);
    CHECK_THROWS_AS((void)Regime(study_market(), c, study_spec(), VaRConstraint{0.0}), InvalidArgument);
    CHECK_THROWS_AS((void)Regime(study_market(), c, study_spec(), PortfolioInsurance{-1.0}), InvalidArgument);
}

TEST_CASE("each solve finishes well within a second") {
    for (const auto& regime : regimes_under_test()) {
        const auto start = std::chrono::steady_clock::now();
        const auto sol = solve(regime);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        CHECK(secs < 1.0);
        CHECK(sol.diagnostics.budget_residual <= 1e-9);
    }
}
