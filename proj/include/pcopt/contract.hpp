#pragma once

#include <optional>
#include <string_view>

namespace pcopt {

/// Defaultable (p): the policyholder bears the shortfall. FullyProtected (np): the equity holder does.
enum class ContractKind { Defaultable, FullyProtected };

[[nodiscard]] std::string_view to_string(ContractKind kind) noexcept;
/// Accepts "defaultable"/"p" and "fully_protected"/"np".
[[nodiscard]] ContractKind parse_contract_kind(std::string_view text);

/// Participating contract with guarantee L_T and bonus share delta above L_T / alpha.
struct ContractParams {
    double l0 = 50.0;
    double e0 = 50.0;
    double x0 = 100.0;
    double alpha = 0.5;
    double delta = 0.6;
    double g = 0.02;
    double guarantee = 0.0;        ///< L_T
    double bonus_threshold = 0.0;  ///< L_T / alpha
    double gap = 0.0;              ///< bonus_threshold - guarantee
    double tilde_delta = 0.0;      ///< alpha * delta

    /// alpha defaults to l0 / (l0 + e0); guarantee defaults to l0 e^{g T}.
    [[nodiscard]] static ContractParams make(double l0, double e0, std::optional<double> alpha, double delta,
                                             double g, double horizon,
                                             std::optional<double> guarantee = std::nullopt);
};

/// (1 - tilde_delta) x - (1 - delta) L_T: the equity payoff above the bonus threshold.
[[nodiscard]] double f_slope(const ContractParams& c, double x) noexcept;

[[nodiscard]] double payoff_equity(const ContractParams& c, ContractKind kind, double x);

[[nodiscard]] double payoff_policyholder(const ContractParams& c, ContractKind kind, double x, bool dead);

}  // namespace pcopt
