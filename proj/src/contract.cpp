#include "pcopt/contract.hpp"

#include "pcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcopt {

std::string_view to_string(ContractKind kind) noexcept {
    return kind == ContractKind::Defaultable ? "defaultable" : "fully_protected";
}

ContractKind parse_contract_kind(std::string_view text) {
    if (text == "defaultable" || text == "p") return ContractKind::Defaultable;
    if (text == "fully_protected" || text == "np") return ContractKind::FullyProtected;
    throw InvalidArgument("unknown contract kind '" + std::string(text) + "'");
}

ContractParams ContractParams::make(double l0, double e0, std::optional<double> alpha, double delta, double g,
                                    double horizon, std::optional<double> guarantee) {
    if (!(l0 > 0.0) || !std::isfinite(l0)) throw InvalidArgument("contract: l0 must be positive");
    if (!(e0 > 0.0) || !std::isfinite(e0)) throw InvalidArgument("contract: e0 must be positive");
    if (!(horizon > 0.0)) throw InvalidArgument("contract: horizon must be positive");
    if (!std::isfinite(g)) throw InvalidArgument("contract: g must be finite");
    const double a = alpha.value_or(l0 / (l0 + e0));
    if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("contract: alpha must lie in (0, 1)");
    if (!(delta >= 0.0 && delta < 1.0)) throw InvalidArgument("contract: delta must lie in [0, 1)");
    const double lt = guarantee.value_or(l0 * std::exp(g * horizon));
    if (!(lt > 0.0) || !std::isfinite(lt)) throw InvalidArgument("contract: guarantee must be positive");
    ContractParams c;
    c.l0 = l0;
    c.e0 = e0;
    c.x0 = l0 + e0;
    c.alpha = a;
    c.delta = delta;
    c.g = g;
    c.guarantee = lt;
    c.bonus_threshold = lt / a;
    c.gap = c.bonus_threshold - lt;
    c.tilde_delta = a * delta;
    return c;
}

double f_slope(const ContractParams& c, double x) noexcept {
    return (1.0 - c.tilde_delta) * x - (1.0 - c.delta) * c.guarantee;
}

double payoff_equity(const ContractParams& c, ContractKind kind, double x) {
    if (!(x >= 0.0)) throw InvalidArgument("payoff_equity: wealth must be non-negative");
    const double lt = c.guarantee;
    if (kind == ContractKind::Defaultable)
        return std::max(x - lt, 0.0) - c.delta * std::max(c.alpha * x - lt, 0.0);
    return x <= c.bonus_threshold ? x - lt : f_slope(c, x);
}

double payoff_policyholder(const ContractParams& c, ContractKind kind, double x, bool dead) {
    if (!(x >= 0.0)) throw InvalidArgument("payoff_policyholder: wealth must be non-negative");
    if (dead) return c.guarantee;
    if (kind == ContractKind::Defaultable) return x - payoff_equity(c, kind, x);
    return c.guarantee + c.delta * std::max(c.alpha * x - c.guarantee, 0.0);
}

}  // namespace pcopt
