#pragma once

#include "pcopt/solver.hpp"

#include <cstdint>

namespace pcopt {

struct StateSnapshot {
    double t = 0.0;
    double xi_t = 1.0;
    double wealth = 0.0;
    double risky_amount = 0.0;
};

/// X_t = E[(xi_T / xi_t) X*(xi_T) | xi_t].
[[nodiscard]] double wealth_at(const Solution& solution, const MarketParams& market, double t, double xi_t);

/// Amount held in the risky asset, from the analytic xi-derivative of X_t.
[[nodiscard]] double strategy_at(const Solution& solution, const MarketParams& market, double t, double xi_t);

/// Same quantity from a central difference of X_t in ln xi.
[[nodiscard]] double strategy_fd(const Solution& solution, const MarketParams& market, double t, double xi_t);

[[nodiscard]] StateSnapshot snapshot(const Solution& solution, const MarketParams& market, double t, double xi_t);

struct PathStatistics {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double rmse = 0.0;           ///< root mean square of X_T - X*(xi_T)
    double relative_rmse = 0.0;  ///< rmse over the root mean square of X*(xi_T)
    double mean_terminal = 0.0;
    double mean_target = 0.0;
    double default_frequency = 0.0;  ///< share of simulated X_T below L_T
    double default_std_error = 0.0;
    double target_default_frequency = 0.0;  ///< share of X*(xi_T) below L_T
    double mean_equity_payoff = 0.0;
    double mean_policyholder_payoff = 0.0;
    double mean_deflated_target = 0.0;  ///< sample mean of xi_T X*(xi_T)
    double min_risky_amount = 0.0;
};

/// Self-financing replication rebalanced at t_k = T (1 - (1 - k/n)^grid_power), so dates
/// cluster near maturity where jumps in the terminal profile need frequent hedging; grid_power 1
/// gives equal steps. xi and the stock are exact between dates. Paths are drawn in blocks with
/// one RNG substream each.
[[nodiscard]] PathStatistics simulate_paths(const Solution& solution, const MarketParams& market,
                                            std::size_t n_paths, std::size_t n_steps, std::uint64_t seed,
                                            double grid_power = 2.0);

}  // namespace pcopt
