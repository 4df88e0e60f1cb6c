#include "pcopt/commands.hpp"

#include "pcopt/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pcopt {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const InfeasibleBudget*>(&e)) return kExitInfeasible;
    if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const DegenerateMarket*>(&e)) return kExitConfig;
    return kExitNumerical;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

namespace {

fs::path output_dir(const RunConfig& config) {
    fs::path dir(config.run.output_dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    return out;
}

std::uint64_t require_seed(const RunConfig& config) {
    if (!config.run.seed) throw ConfigError("a seed is required: pass --seed or set run.seed");
    return *config.run.seed;
}

Regime regime_of(const RunConfig& config) {
    return Regime(config.market, config.contract(), config.preferences, config.constraint());
}

std::string optional_text(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("none");
}

void print_summary(const Solution& s, std::ostream& log) {
    log << "lambda              " << format_number(s.lambda) << '\n'
        << "lambda2             " << format_number(s.lambda2) << '\n'
        << "case                " << (s.case_class ? std::string(to_string(*s.case_class)) : std::string("none")) << '\n'
        << "constraint          " << describe(s.constraint) << (s.binding ? " (binding)" : "") << '\n'
        << "xi_bar              " << optional_text(s.xi_bar) << '\n'
        << "xi_tildeL           " << format_number(s.thresholds.xi_tildeL) << '\n'
        << "xi_hatL             " << format_number(s.thresholds.xi_hatL) << '\n'
        << "xi_U                " << optional_text(s.thresholds.xi_U) << '\n'
        << "xi_hat_1            " << optional_text(s.thresholds.xi_hat_1) << '\n'
        << "xi_hat_eps          " << optional_text(s.thresholds.xi_hat_eps) << '\n'
        << "default_probability " << format_number(s.diagnostics.default_probability) << '\n'
        << "budget_residual     " << format_number(s.diagnostics.budget_residual) << '\n';
}

std::string label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// Log-spaced grid over the central mass of xi_T, widened so every breakpoint shows.
std::vector<double> profile_grid(const WealthProfile& profile, const StatePriceLaw& law, std::size_t points) {
    const auto central = xi_grid(law, 2);
    double lo = std::log(central.front());
    double hi = std::log(central.back());
    if (!profile.breakpoints().empty()) {
        lo = std::min(lo, std::log(profile.breakpoints().front()) - 0.1);
        hi = std::max(hi, std::log(profile.breakpoints().back()) + 0.1);
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    return grid;
}

}  // namespace

Solution cmd_solve(const RunConfig& config, std::ostream& log) {
    const Regime regime = regime_of(config);
    Solution s = solve(regime);
    const fs::path dir = output_dir(config);
    {
        auto out = open_out(dir / "profile.csv");
        out << "xi,terminal_wealth,segment_label\n";
        for (double xi : profile_grid(s.profile, regime.law(), config.run.profile_points)) {
            const std::size_t i = s.profile.segment_index(xi);
            out << format_number(xi) << ',' << format_number(s.profile.segment_value(i, xi)) << ','
                << to_string(s.profile.segments()[i]) << '\n';
        }
    }
    {
        auto out = open_out(dir / "solution.json");
        out << solution_to_json(s).dump(2) << '\n';
    }
    print_summary(s, log);
    return s;
}

void cmd_curve(const RunConfig& config, double t, const SweepOptions& sweeps, std::ostream& log) {
    if (!(t >= 0.0 && t < config.market.horizon)) throw ConfigError("curve: t must lie in [0, T)");
    std::vector<std::pair<std::string, RunConfig>> series;
    if (sweeps.empty()) series.emplace_back("curve.csv", config);
    auto add = [&](const char* name, const std::vector<double>& values, auto setter) {
        for (double v : values) {
            RunConfig c = config;
            setter(c, v);
            c.validate();
            series.emplace_back(std::string("curve_") + name + "=" + label(v) + ".csv", c);
        }
    };
    add("alpha", sweeps.alpha, [](RunConfig& c, double v) { c.alpha = v; });
    add("delta", sweeps.delta, [](RunConfig& c, double v) { c.delta = v; });
    add("eta", sweeps.eta, [](RunConfig& c, double v) { c.preferences.eta = v; });
    add("epsilon", sweeps.epsilon, [](RunConfig& c, double v) { c.preferences.epsilon = v; });

    const fs::path dir = output_dir(config);
    for (const auto& [file, cfg] : series) {
        const Solution s = solve(regime_of(cfg));
        std::vector<double> grid{1.0};
        if (t > 0.0) grid = xi_grid(state_price_law(cfg.market, t), cfg.run.curve_points);
        auto out = open_out(dir / file);
        out << "xi_t,wealth,risky_amount\n";
        for (double xi : grid) {
            const auto snap = snapshot(s, cfg.market, t, xi);
            out << format_number(xi) << ',' << format_number(snap.wealth) << ',' << format_number(snap.risky_amount)
                << '\n';
        }
        log << "wrote " << (dir / file).string() << '\n';
    }
}

PathStatistics cmd_simulate(const RunConfig& config, std::ostream& log) {
    const std::uint64_t seed = require_seed(config);
    const Solution s = solve(regime_of(config));
    const auto st = simulate_paths(s, config.market, config.run.sim_paths, config.run.sim_steps, seed);
    const std::vector<std::pair<const char*, double>> rows{
        {"n_paths", static_cast<double>(st.n_paths)},
        {"n_steps", static_cast<double>(st.n_steps)},
        {"rmse", st.rmse},
        {"relative_rmse", st.relative_rmse},
        {"mean_terminal", st.mean_terminal},
        {"mean_target", st.mean_target},
        {"default_frequency", st.default_frequency},
        {"default_std_error", st.default_std_error},
        {"target_default_frequency", st.target_default_frequency},
        {"model_default_probability", s.diagnostics.default_probability},
        {"mean_equity_payoff", st.mean_equity_payoff},
        {"mean_policyholder_payoff", st.mean_policyholder_payoff},
        {"mean_deflated_target", st.mean_deflated_target},
        {"min_risky_amount", st.min_risky_amount}};
    auto out = open_out(output_dir(config) / "simulation.csv");
    out << "metric,value\n";
    for (const auto& [name, value] : rows) {
        out << name << ',' << format_number(value) << '\n';
        log << name << ' ' << format_number(value) << '\n';
    }
    return st;
}

OracleReport cmd_verify(const RunConfig& config, std::optional<double> tamper, std::ostream& log) {
    const std::uint64_t seed = require_seed(config);
    const Regime regime = regime_of(config);
    const Solution s = tamper ? solve(regime, *tamper) : solve(regime);
    const OracleReport report = run_verification(
        s, VerifyOptions{.mc_paths = config.run.mc_paths, .seed = seed, .oracle_points = config.run.oracle_points});

    auto out = open_out(output_dir(config) / "verify.csv");
    out << "section,name,passed,value,std_error,detail\n";
    for (const auto& g : report.gates) {
        out << "gate," << g.name << ',' << (g.passed ? 1 : 0) << ",,,\"" << g.detail << "\"\n";
        log << (g.passed ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    }
    out << "estimate,utility_mc,," << format_number(report.utility_mc.mean) << ','
        << format_number(report.utility_mc.std_error) << ",\n";
    out << "estimate,utility_quadrature,," << format_number(report.utility_quadrature) << ",,\n";
    out << "estimate,budget_mc,," << format_number(report.budget_mc.mean) << ','
        << format_number(report.budget_mc.std_error) << ",\n";
    out << "estimate,max_lagrangian_gap,," << format_number(report.max_lagrangian_gap) << ",,\n";
    if (report.dominance_xi_star) out << "estimate,dominance_xi_star,," << format_number(*report.dominance_xi_star) << ",,\n";
    for (const auto& c : report.competitors) {
        out << "competitor," << c.name << ',' << (c.feasible ? 1 : 0) << ',' << format_number(c.utility.mean) << ','
            << format_number(c.utility.std_error) << ",\"advantage " << format_number(c.advantage.mean) << " se "
            << format_number(c.advantage.std_error) << (c.note.empty() ? "" : "; " + c.note) << "\"\n";
        log << "competitor " << c.name << (c.feasible ? "" : " (infeasible)") << ": advantage "
            << c.advantage.mean << " +- " << c.advantage.std_error << '\n';
    }
    return report;
}

}  // namespace pcopt
