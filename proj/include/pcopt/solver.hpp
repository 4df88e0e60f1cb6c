#pragma once

#include "pcopt/concavify.hpp"
#include "pcopt/market.hpp"
#include "pcopt/profile.hpp"

#include <optional>
#include <string>
#include <variant>

namespace pcopt {

struct Unconstrained {};
/// P(X_T < L_T) <= beta.
struct VaRConstraint {
    double beta = 0.025;
};
/// X_T >= floor almost surely.
struct PortfolioInsurance {
    double floor = 0.0;
};
using ConstraintSpec = std::variant<Unconstrained, VaRConstraint, PortfolioInsurance>;

void validate(const ConstraintSpec& constraint);
[[nodiscard]] std::string describe(const ConstraintSpec& constraint);

/// Problem data with everything that does not depend on the multiplier precomputed.
class Regime {
public:
    Regime(const MarketParams& market, const ContractParams& contract, const PreferenceSpec& spec,
           ConstraintSpec constraint);

    [[nodiscard]] const MarketParams& market() const noexcept { return market_; }
    [[nodiscard]] const Preferences& preferences() const noexcept { return prefs_; }
    [[nodiscard]] const ContractParams& contract() const noexcept { return prefs_.contract(); }
    [[nodiscard]] const StatePriceLaw& law() const noexcept { return law_; }
    [[nodiscard]] const ConstraintSpec& constraint() const noexcept { return constraint_; }
    /// Absent when the floor is at or above L_T (no non-concave part remains).
    [[nodiscard]] const std::optional<Concavification>& concavification() const noexcept { return conc_; }
    [[nodiscard]] std::optional<CaseClass> case_class() const;
    /// Lowest admissible wealth: the PI floor, else 0.
    [[nodiscard]] double floor() const noexcept { return floor_; }
    /// Disutility of ending at floor(); 0 when the floor is at or above L_T.
    [[nodiscard]] double floor_loss() const noexcept { return q_; }
    [[nodiscard]] std::optional<double> xi_bar() const noexcept { return xi_bar_; }

    [[nodiscard]] Thresholds thresholds(double lambda) const;
    /// Pointwise maximizer ignoring the floor: I_eps, bonus threshold, or L_T + I by region.
    [[nodiscard]] double candidate(double lambda, double xi) const;
    /// Lagrangian advantage of candidate() over the floor, before any VaR multiplier.
    [[nodiscard]] double advantage(double lambda, double xi) const;
    /// xi at which the profile drops to the floor, before the VaR adjustment.
    [[nodiscard]] double floor_start(double lambda) const;
    /// Profile cut including the VaR adjustment.
    [[nodiscard]] double cut(double lambda) const;
    [[nodiscard]] bool binding(double lambda) const;
    [[nodiscard]] double lambda2(double lambda) const;
    [[nodiscard]] double pointwise_argmax(double lambda, double xi) const;
    /// Optimal profile for lambda; breakpoint_scale multiplies every lambda-dependent breakpoint.
    [[nodiscard]] WealthProfile profile(double lambda, double breakpoint_scale = 1.0) const;
    /// Infimum of the budget cost over lambda; the initial wealth must exceed it.
    [[nodiscard]] double min_budget() const;

private:
    MarketParams market_;
    Preferences prefs_;
    StatePriceLaw law_;
    ConstraintSpec constraint_;
    std::optional<Concavification> conc_;
    double floor_ = 0.0;
    double q_ = 0.0;
    std::optional<double> xi_bar_;
};

struct Diagnostics {
    double budget_residual = 0.0;  ///< |E[xi X] - X0| / X0
    double default_probability = 0.0;
    std::size_t iterations = 0;
};

struct Solution {
    WealthProfile profile;
    double lambda = 0.0;
    double lambda2 = 0.0;
    std::optional<CaseClass> case_class;
    bool binding = false;
    ConstraintSpec constraint;
    Thresholds thresholds;
    std::optional<double> xi_bar;
    MarketParams market;
    Diagnostics diagnostics;
};

/// Convenience wrappers over Regime.
[[nodiscard]] double pointwise_argmax(const Regime& regime, double lambda, double xi);
[[nodiscard]] double lambda2(const Regime& regime, double lambda);

/// E[xi_T X(xi_T)].
[[nodiscard]] double budget_cost(const WealthProfile& profile, const StatePriceLaw& law,
                                 ExpectationMethod method = ExpectationMethod::Auto);

/// Finds lambda with budget_cost = X0 for the regime's profile family.
[[nodiscard]] Solution solve(const Regime& regime, double breakpoint_scale = 1.0);
[[nodiscard]] Solution solve(const MarketParams& market, const ContractParams& contract, const PreferenceSpec& spec,
                             const ConstraintSpec& constraint);

/// Rebuilds the regime a solution came from.
[[nodiscard]] Regime regime_of(const Solution& solution);

/// P(X(xi) < L_T) under `law`.
[[nodiscard]] double default_probability(const WealthProfile& profile, const StatePriceLaw& law);
[[nodiscard]] double default_probability(const Solution& solution, const StatePriceLaw& law);

}  // namespace pcopt
