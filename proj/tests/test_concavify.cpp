#include "support.hpp"

#include "pcopt/concavify.hpp"
#include "pcopt/errors.hpp"
#include "pcopt/solver.hpp"
#include "pcopt/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace pcopt;
using pcopt::testing::rel;
using pcopt::testing::study_contract;
using pcopt::testing::study_market;
using pcopt::testing::study_spec;

namespace {

// Direct evaluation for gamma = 1/2: U(x) = 2 sqrt(x), U'(x) = 1/sqrt(x).
double upsilon_one_by_hand(const ContractParams& c, double x, double q, double l) {
    const double v = x - c.guarantee;
    return 2.0 * std::sqrt(v) - (x - l) / std::sqrt(v) + q;
}

double upsilon_eps_by_hand(const ContractParams& c, double eps, double x, double q, double l) {
    const double f = (1.0 - c.tilde_delta) * x - (1.0 - c.delta) * c.guarantee;
    const double v = x - c.guarantee;
    const double u = (1.0 - eps) * 2.0 * std::sqrt(f) + eps * 2.0 * std::sqrt(v);
    const double du = (1.0 - eps) * (1.0 - c.tilde_delta) / std::sqrt(f) + eps / std::sqrt(v);
    return u - du * (x - l) + q;
}

// Kinds of wealth the brute-force oracle picks along xi: above the bonus threshold, on it,
// between guarantee and threshold, or at the floor.
std::set<int> brute_force_shape(const Regime& regime, double lambda) {
    const auto& c = regime.contract();
    std::set<int> kinds;
    for (double lx = -6.0; lx <= 6.0; lx += 0.01) {
        const double x = brute_force_argmax(regime, lambda, std::exp(lx));
        if (x > c.bonus_threshold * (1 + 1e-9)) kinds.insert(0);
        else if (x >= c.bonus_threshold * (1 - 1e-9)) kinds.insert(1);
        else if (x > c.guarantee) kinds.insert(2);
        else kinds.insert(3);
    }
    return kinds;
}

}  // namespace

TEST_CASE("upsilon matches direct evaluation and is increasing") {
    for (double alpha : {0.2, 0.5, 0.8}) {
        const auto c = study_contract(alpha, 0.6);
        for (double eps : {0.0, 0.1, 1.0}) {
            const Preferences p(study_spec(ContractKind::FullyProtected, eps), c);
            const double q = p.loss_bound();
            double prev = -1e300;
            for (double x = c.bonus_threshold; x < 20.0 * c.bonus_threshold; x *= 1.05) {
                const double v = upsilon(p, x, eps, q, 5.0);
                CHECK(rel(v, upsilon_eps_by_hand(c, eps, x, q, 5.0)) < 1e-11);
                CHECK(v > prev);
                prev = v;
            }
            prev = -1e300;
            for (double k = 30; k >= 0; k -= 0.5) {
                const double x = c.guarantee + c.gap * std::pow(2.0, -k);
                const double v = upsilon(p, x, 1.0, q, 0.0);
                CHECK(rel(v, upsilon_one_by_hand(c, x, q, 0.0)) < 1e-11);
                CHECK(v > prev);
                prev = v;
            }
            const double diff = upsilon(p, c.bonus_threshold, eps, q) - upsilon(p, c.bonus_threshold, 1.0, q);
            const double expected = (1.0 - p.mix().delta_eps) * p.u_prime(c.gap) * c.bonus_threshold;
            CHECK(std::abs(diff - expected) < 1e-12 * (1.0 + std::abs(expected)));
            CHECK(diff >= 0.0);
        }
    }
    const Preferences p(study_spec(), study_contract());
    CHECK(upsilon(p, p.contract().guarantee * (1 + 1e-14), 1.0, 0.0) < -1e5);
    CHECK_THROWS_AS((void)upsilon(p, 10.0, 0.5, 0.0), InvalidArgument);
}

TEST_CASE("tangency points and the tangent-line identity") {
    const auto c = study_contract(0.2, 0.6);
    const Preferences p(study_spec(ContractKind::FullyProtected, 0.0), c);
    for (double q : {0.0, 1.0, p.loss_bound()}) {
        for (double l : {0.0, 10.0, 40.0}) {
            if (!(upsilon(p, c.bonus_threshold, 1.0, q, l) > 0.0)) continue;
            const double y = tangency_point(p, Branch::One, q, l);
            CHECK(y > c.guarantee);
            CHECK(y < c.bonus_threshold);
            CHECK(std::abs(upsilon(p, y, 1.0, q, l)) <= 1e-10 * (1 + q));
            const double slope = (p.u(y - c.guarantee) + q) / (y - l);
            CHECK(rel(slope, p.u_prime(y - c.guarantee)) < 1e-9);
        }
    }
    const auto hi = study_contract(0.8, 0.6);
    const Preferences ph(study_spec(ContractKind::Defaultable, 0.0), hi);
    REQUIRE(upsilon(ph, hi.bonus_threshold, 0.0, 0.0) < 0.0);
    const double y = tangency_point(ph, Branch::Eps, 0.0, 0.0);
    CHECK(y > hi.bonus_threshold);
    CHECK(std::abs(upsilon(ph, y, 0.0, 0.0)) <= 1e-10);
    CHECK(rel(ph.u_eps(y) / y, ph.u_eps_prime(y)) < 1e-9);
    CHECK_THROWS_AS((void)tangency_point(p, Branch::Eps, 0.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS((void)tangency_point(ph, Branch::One, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("tangency points move left as q or l increase") {
    for (double alpha : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
        const auto c = study_contract(alpha, 0.6);
        const Preferences p(study_spec(ContractKind::FullyProtected, 0.0), c);
        const double ql = p.loss_at(0.2 * c.guarantee);
        if (upsilon(p, c.bonus_threshold, 1.0, 0.0) > 0.0 && upsilon(p, c.bonus_threshold, 1.0, ql) > 0.0) {
            CHECK(tangency_point(p, Branch::One, ql, 0.0) < tangency_point(p, Branch::One, 0.0, 0.0));
        }
        if (upsilon(p, c.bonus_threshold, 1.0, 1.0, 0.0) > 0.0) {
            double prev = 1e300;
            for (double l : {0.0, 10.0, 20.0, 40.0, 55.0}) {
                const double y = tangency_point(p, Branch::One, 1.0, l);
                CHECK(y < prev);
                prev = y;
            }
        }
    }
    // The eps branch root exists only for large alpha, where the bonus share dominates.
    const auto c = study_contract(0.99, 0.6);
    const Preferences p(study_spec(ContractKind::FullyProtected, 0.0), c);
    const double ql = p.loss_at(0.2 * c.guarantee);
    REQUIRE(upsilon(p, c.bonus_threshold, 0.0, ql) < 0.0);
    CHECK(tangency_point(p, Branch::Eps, ql, 0.0) < tangency_point(p, Branch::Eps, 0.0, 0.0));
}

TEST_CASE("classification and thresholds") {
    const auto c = study_contract(0.4, 0.6);
    for (double eps : {0.0, 0.1, 1.0}) {
        const Preferences p(study_spec(ContractKind::Defaultable, eps), c);
        const auto k = classify(p, p.loss_bound());
        const auto t1 = k.thresholds(0.1);
        const auto t2 = k.thresholds(0.2);
        CHECK(rel(t2.xi_tildeL, 0.5 * t1.xi_tildeL) < 1e-15);
        CHECK(rel(t2.xi_hatL, 0.5 * t1.xi_hatL) < 1e-15);
        CHECK(rel(t2.loss_start(), 0.5 * t1.loss_start()) < 1e-15);
        CHECK(t1.xi_tildeL <= t1.xi_hatL);
        if (k.case_class == CaseClass::FourRegion) {
            CHECK(t1.xi_hatL < *t1.xi_hat_1);
            CHECK(k.upsilon_eps > 0.0);
        }
        CHECK_THROWS_AS((void)k.thresholds(0.0), InvalidArgument);
    }
    // eps = 1: the two indicators coincide, so the middle case cannot occur.
    for (double alpha : {0.2, 0.4, 0.6, 0.8}) {
        const Preferences p(study_spec(ContractKind::Defaultable, 1.0), study_contract(alpha, 0.6));
        const auto k = classify(p, p.loss_bound());
        CHECK(k.upsilon_one == k.upsilon_eps);
        CHECK(k.case_class != CaseClass::ThreeRegion);
    }
    const Preferences steep(study_spec(ContractKind::FullyProtected, 0.1, 2.0), c);
    const auto ks = classify(steep, steep.loss_bound());
    CHECK(ks.case_class == CaseClass::FourRegion);
    CHECK(std::isinf(*ks.thresholds(1.0).xi_hat_1));
}

TEST_CASE("case labels agree with the brute-force profile shape") {
    struct Row {
        double alpha, delta;
        ContractKind kind;
        double eps;
    };
    for (const Row row : {Row{0.8, 0.9, ContractKind::Defaultable, 0.0}, Row{0.4, 0.6, ContractKind::Defaultable, 0.0},
                          Row{0.6, 0.6, ContractKind::Defaultable, 0.0}, Row{0.8, 0.6, ContractKind::Defaultable, 0.1},
                          Row{0.4, 0.6, ContractKind::FullyProtected, 0.1}}) {
        const auto c = study_contract(row.alpha, row.delta);
        const Regime regime(study_market(), c, study_spec(row.kind, row.eps), Unconstrained{});
        const auto& k = *regime.concavification();
        // Sign of Upsilon^{1,q}(bonus threshold) evaluated independently.
        const double q = regime.floor_loss();
        const double sign_one = upsilon_one_by_hand(c, c.bonus_threshold, q, 0.0);
        const double sign_eps = upsilon_eps_by_hand(c, row.eps, c.bonus_threshold, q, 0.0);
        CaseClass expected = CaseClass::TwoRegion;
        if (sign_one > 0.0) expected = CaseClass::FourRegion;
        else if (sign_eps >= 0.0) expected = CaseClass::ThreeRegion;
        CHECK(k.case_class == expected);

        const auto sol = solve(regime);
        const auto shape = brute_force_shape(regime, sol.lambda);
        switch (k.case_class) {
            case CaseClass::FourRegion: CHECK(shape == std::set<int>{0, 1, 2, 3}); break;
            case CaseClass::ThreeRegion: CHECK(shape == std::set<int>{0, 1, 3}); break;
            case CaseClass::TwoRegion: CHECK(shape == std::set<int>{0, 3}); break;
        }
    }
}
