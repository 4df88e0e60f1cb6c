#pragma once

#include "pcopt/errors.hpp"
#include "pcopt/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pcopt {

/// Malformed or invalid configuration document.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct RunSettings {
    std::optional<std::uint64_t> seed;
    std::size_t mc_paths = 1'000'000;
    std::size_t sim_paths = 10'000;
    std::size_t sim_steps = 2500;
    std::size_t profile_points = 2001;
    std::size_t curve_points = 401;
    std::size_t oracle_points = 2000;
    double t = 8.0;
    std::string output_dir = ".";
};

struct RunConfig {
    MarketParams market;
    double l0 = 50.0;
    double e0 = 50.0;
    std::optional<double> alpha;
    double delta = 0.6;
    double g = 0.02;
    std::optional<double> guarantee;
    PreferenceSpec preferences;
    std::string constraint_type = "none";
    double beta = 0.025;
    std::optional<double> floor;
    double floor_fraction = 0.2;
    RunSettings run;

    [[nodiscard]] ContractParams contract() const;
    [[nodiscard]] ConstraintSpec constraint() const;
    /// Throws ConfigError on any domain violation.
    void validate() const;
};

[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

[[nodiscard]] nlohmann::json solution_to_json(const Solution& solution);
[[nodiscard]] Solution solution_from_json(const nlohmann::json& doc);

}  // namespace pcopt
