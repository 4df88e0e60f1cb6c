#include "pcopt/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Optimal investment for participating insurance contracts"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> t;
    std::optional<double> tamper;
    pcopt::SweepOptions sweeps;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--seed", seed, "Random seed");
    };
    auto* solve = app.add_subcommand("solve", "Solve and write the terminal-wealth profile");
    auto* curve = app.add_subcommand("curve", "Write wealth and risky amount against xi_t");
    auto* simulate = app.add_subcommand("simulate", "Replicate the optimal wealth on simulated paths");
    auto* verify = app.add_subcommand("verify", "Run the oracle suite");
    for (auto* sub : {solve, curve, simulate, verify}) common(sub);
    curve->add_option("--t", t, "Time in years");
    curve->add_option("--alpha-list", sweeps.alpha, "Participation rates to sweep")->delimiter(',');
    curve->add_option("--delta-list", sweeps.delta, "Bonus rates to sweep")->delimiter(',');
    curve->add_option("--eta-list", sweeps.eta, "Loss-aversion values to sweep")->delimiter(',');
    curve->add_option("--epsilon-list", sweeps.epsilon, "Death probabilities to sweep")->delimiter(',');
    verify->add_option("--tamper", tamper)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pcopt::kExitConfig;
    }

    try {
        pcopt::RunConfig config = config_path.empty() ? pcopt::parse_config(nlohmann::json::object())
                                                      : pcopt::load_config(config_path);
        if (!out_dir.empty()) config.run.output_dir = out_dir;
        if (seed) config.run.seed = *seed;
        if (*solve) {
            (void)pcopt::cmd_solve(config, std::cout);
        } else if (*curve) {
            pcopt::cmd_curve(config, t.value_or(config.run.t), sweeps, std::cout);
        } else if (*simulate) {
            (void)pcopt::cmd_simulate(config, std::cout);
        } else if (*verify) {
            const auto report = pcopt::cmd_verify(config, tamper, std::cout);
            if (!report.passed()) {
                std::cerr << "oracle failure: " << report.first_failure().value_or("unknown") << '\n';
                return pcopt::kExitOracle;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pcopt::exit_code_for(e);
    }
    return pcopt::kExitOk;
}
