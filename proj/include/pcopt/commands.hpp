#pragma once

#include "pcopt/config.hpp"
#include "pcopt/dynamics.hpp"
#include "pcopt/verify.hpp"

#include <exception>
#include <ostream>
#include <vector>

namespace pcopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitOracle = 5;

/// Process exit code for an exception escaping a command.
[[nodiscard]] int exit_code_for(const std::exception& e) noexcept;

/// Parameter sweeps for the curve command; each non-empty list yields one series per value.
struct SweepOptions {
    std::vector<double> alpha;
    std::vector<double> delta;
    std::vector<double> eta;
    std::vector<double> epsilon;

    [[nodiscard]] bool empty() const noexcept {
        return alpha.empty() && delta.empty() && eta.empty() && epsilon.empty();
    }
};

/// Solves and writes profile.csv and solution.json to the output directory.
Solution cmd_solve(const RunConfig& config, std::ostream& log);

/// Writes curve.csv, or one curve_<param>=<value>.csv per sweep value, at time t.
void cmd_curve(const RunConfig& config, double t, const SweepOptions& sweeps, std::ostream& log);

/// Replicates the optimal wealth along simulated paths and writes simulation.csv.
PathStatistics cmd_simulate(const RunConfig& config, std::ostream& log);

/// Runs the oracle suite and writes verify.csv. A tamper factor scales the solution's
/// breakpoints before verification.
OracleReport cmd_verify(const RunConfig& config, std::optional<double> tamper, std::ostream& log);

/// "%.17e" formatting used by every CSV writer.
[[nodiscard]] std::string format_number(double x);

}  // namespace pcopt
