#include "pcopt/dynamics.hpp"

#include "pcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcopt {

namespace {

constexpr std::size_t kPathBlock = 256;

StatePriceLaw remaining_law(const MarketParams& market, double t) {
    if (!(t >= 0.0) || !(t < market.horizon)) throw InvalidArgument("dynamics: t must lie in [0, T)");
    const double tau = market.horizon - t;
    const double theta = market.theta();
    return StatePriceLaw{.theta = theta,
                         .log_mean = -(market.r + 0.5 * theta * theta) * tau,
                         .log_sd = std::abs(theta) * std::sqrt(tau),
                         .t = tau};
}

void check_state(double xi_t) {
    if (!(xi_t > 0.0) || !std::isfinite(xi_t)) throw InvalidArgument("dynamics: xi_t must be positive");
}

double risky_from_delta(const MarketParams& market, double delta) {
    return -(market.theta() / market.sigma) * delta;
}

}  // namespace

double wealth_at(const Solution& solution, const MarketParams& market, double t, double xi_t) {
    check_state(xi_t);
    return discounted_value(solution.profile, remaining_law(market, t), xi_t, false).value;
}

double strategy_at(const Solution& solution, const MarketParams& market, double t, double xi_t) {
    check_state(xi_t);
    const auto dv = discounted_value(solution.profile, remaining_law(market, t), xi_t, true);
    return risky_from_delta(market, dv.delta);
}

double strategy_fd(const Solution& solution, const MarketParams& market, double t, double xi_t) {
    check_state(xi_t);
    const auto law = remaining_law(market, t);
    const double x = std::log(xi_t);
    double step = 1e-5;
    for (double bp : solution.profile.breakpoints())
        if (std::abs(x - std::log(bp)) < 5.0 * law.log_sd) step = 1e-7;
    auto z = [&](double lx) { return discounted_value(solution.profile, law, std::exp(lx), false).value; };
    const double delta = (z(x + step) - z(x - step)) / (2.0 * step);
    return risky_from_delta(market, delta);
}

StateSnapshot snapshot(const Solution& solution, const MarketParams& market, double t, double xi_t) {
    check_state(xi_t);
    const auto dv = discounted_value(solution.profile, remaining_law(market, t), xi_t, true);
    return StateSnapshot{.t = t, .xi_t = xi_t, .wealth = dv.value, .risky_amount = risky_from_delta(market, dv.delta)};
}

PathStatistics simulate_paths(const Solution& solution, const MarketParams& market, std::size_t n_paths,
                              std::size_t n_steps, std::uint64_t seed, double grid_power) {
    if (!(grid_power >= 1.0)) throw InvalidArgument("simulate_paths: grid_power must be at least 1");
    if (n_paths == 0 || n_steps == 0) throw InvalidArgument("simulate_paths: need at least one path and one step");
    market.validate();
    if (market.theta() == 0.0) throw DegenerateMarket("simulate_paths: zero market price of risk");
    const auto& profile = solution.profile;
    const auto& c = profile.preferences().contract();
    const ContractKind kind = profile.preferences().spec().kind;
    const double theta = market.theta();
    const double stock_drift = market.mu - 0.5 * market.sigma * market.sigma;
    const double xi_drift = -(market.r + 0.5 * theta * theta);

    std::vector<double> times(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k)
        times[k] = market.horizon * (1.0 - std::pow(1.0 - static_cast<double>(k) / static_cast<double>(n_steps), grid_power));
    std::vector<StatePriceLaw> laws(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) laws[k] = remaining_law(market, times[k]);
    const double x_start = discounted_value(profile, laws[0], 1.0, false).value;

    PathStatistics st;
    st.n_paths = n_paths;
    st.n_steps = n_steps;
    st.min_risky_amount = std::numeric_limits<double>::infinity();
    double sq_err = 0.0, sq_target = 0.0, defaults = 0.0, target_defaults = 0.0;
    for (std::size_t start = 0, block = 0; start < n_paths; start += kPathBlock, ++block) {
        NormalStream normals(seed, block);
        const std::size_t end = std::min(n_paths, start + kPathBlock);
        for (std::size_t p = start; p < end; ++p) {
            double x = x_start;
            double log_xi = 0.0;
            for (std::size_t k = 0; k < n_steps; ++k) {
                const double delta = discounted_value(profile, laws[k], std::exp(log_xi), true).delta;
                const double pi = risky_from_delta(market, delta);
                st.min_risky_amount = std::min(st.min_risky_amount, pi);
                const double h = times[k + 1] - times[k];
                const double dw = std::sqrt(h) * normals();
                const double growth = std::exp(market.r * h);
                const double ret = std::exp(stock_drift * h + market.sigma * dw);
                log_xi += xi_drift * h - theta * dw;
                x = std::max(0.0, x * growth + pi * (ret - growth));
            }
            const double xi_t = std::exp(log_xi);
            const double target = profile(xi_t);
            const double err = x - target;
            sq_err += err * err;
            sq_target += target * target;
            st.mean_terminal += x;
            st.mean_target += target;
            st.mean_deflated_target += xi_t * target;
            defaults += x < c.guarantee ? 1.0 : 0.0;
            target_defaults += target < c.guarantee ? 1.0 : 0.0;
            st.mean_equity_payoff += payoff_equity(c, kind, x);
            st.mean_policyholder_payoff += payoff_policyholder(c, kind, x, false);
        }
    }
    const double n = static_cast<double>(n_paths);
    st.rmse = std::sqrt(sq_err / n);
    st.relative_rmse = sq_target > 0.0 ? st.rmse / std::sqrt(sq_target / n) : st.rmse;
    st.mean_terminal /= n;
    st.mean_target /= n;
    st.mean_deflated_target /= n;
    st.mean_equity_payoff /= n;
    st.mean_policyholder_payoff /= n;
    st.default_frequency = defaults / n;
    st.default_std_error = std::sqrt(st.default_frequency * (1.0 - st.default_frequency) / n);
    st.target_default_frequency = target_defaults / n;
    return st;
}

}  // namespace pcopt
