#pragma once

#include "pcopt/solver.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pcopt {

/// Equity holder's utility of terminal wealth x, built from the contract payoffs:
/// (1 - eps) U_S(alive equity payoff) + eps U_S(x - L_T), with U_S the S-shaped utility.
[[nodiscard]] double payoff_utility(const Preferences& prefs, double x);

/// Psi(x) = utility - lambda xi x, minus lambda2 below L_T; -inf below a PI floor.
[[nodiscard]] double lagrangian(const Regime& regime, double lambda, double xi, double x);

/// Grid search of the Lagrangian over a dense log grid plus the exact candidate set.
[[nodiscard]] double brute_force_argmax(const Regime& regime, double lambda, double xi);

/// Relative shortfall of pointwise_argmax against brute_force_argmax; <= 0 means no shortfall.
[[nodiscard]] double lagrangian_gap(const Regime& regime, double lambda, double xi);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Antithetic draws of xi_T shared by every estimator, so differences use common random numbers.
class ScenarioSet {
public:
    ScenarioSet(const StatePriceLaw& law, std::size_t n, std::uint64_t seed);

    [[nodiscard]] const std::vector<double>& xi() const noexcept { return xi_; }
    /// Mean of f(xi) with the standard error taken over antithetic pair averages.
    [[nodiscard]] McEstimate mean(const std::function<double(double)>& f) const;
    /// Mean of f(xi) - g(xi) on the same draws.
    [[nodiscard]] McEstimate difference(const std::function<double(double)>& f,
                                        const std::function<double(double)>& g) const;

private:
    std::vector<double> xi_;
};

struct UtilityEstimate {
    McEstimate utility;
    McEstimate budget;  ///< E[xi_T X]
};

[[nodiscard]] UtilityEstimate mc_expected_utility(const std::function<double(double)>& payoff,
                                                  const Preferences& prefs, const ScenarioSet& scenarios);
[[nodiscard]] UtilityEstimate mc_expected_utility(const Solution& solution, std::size_t n, std::uint64_t seed);

/// E[utility(X(xi_T))] by adaptive quadrature over each profile segment.
[[nodiscard]] double expected_utility_quadrature(const WealthProfile& profile, const StatePriceLaw& law);

/// Largest grid point xi* with a(xi) >= b(xi) for every grid xi >= xi*; empty if none.
[[nodiscard]] std::optional<double> dominance_xi_star(const WealthProfile& a, const WealthProfile& b,
                                                      const std::vector<double>& grid);

/// Log-spaced xi grid between the lower and upper 1e-4 quantiles of `law`.
[[nodiscard]] std::vector<double> xi_grid(const StatePriceLaw& law, std::size_t points, double tail = 1e-4);

struct CompetitorResult {
    std::string name;
    bool feasible = false;
    std::string note;
    McEstimate utility;
    McEstimate advantage;  ///< solution minus competitor, paired, with the budget control variate
};

struct GateResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct OracleReport {
    double max_lagrangian_gap = 0.0;
    std::size_t oracle_points = 0;
    McEstimate budget_mc;
    McEstimate utility_mc;
    double utility_quadrature = 0.0;
    std::vector<CompetitorResult> competitors;
    std::optional<double> dominance_xi_star;
    std::vector<GateResult> gates;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::optional<std::string> first_failure() const;
};

struct VerifyOptions {
    std::size_t mc_paths = 1'000'000;
    std::uint64_t seed = 0;
    std::size_t oracle_points = 2000;
    double competitor_sigmas = 3.0;
};

/// Feasible alternatives at the same initial wealth, evaluated on shared scenarios.
[[nodiscard]] std::vector<CompetitorResult> competitor_suite(const Solution& solution, const ScenarioSet& scenarios);

/// Full oracle run: Lagrangian gap, budget and utility by MC, competitors, VaR compliance.
[[nodiscard]] OracleReport run_verification(const Solution& solution, const VerifyOptions& options);

}  // namespace pcopt
