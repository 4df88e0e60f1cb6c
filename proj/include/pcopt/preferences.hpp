#pragma once

#include "pcopt/contract.hpp"

#include <utility>

namespace pcopt {

/// Power utility x^{1-gamma}/(1-gamma), logarithmic at gamma = 1.
class CrraUtility {
public:
    explicit CrraUtility(double gamma);

    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] bool is_log() const noexcept { return gamma_ == 1.0; }
    /// True when U(0) is finite (gamma < 1).
    [[nodiscard]] bool bounded_below() const noexcept { return gamma_ < 1.0; }

    /// Defined on x >= 0; U(0) is 0 or -inf.
    [[nodiscard]] double value(double x) const noexcept;
    [[nodiscard]] double marginal(double x) const noexcept;
    [[nodiscard]] double curvature(double x) const noexcept;
    [[nodiscard]] double inverse_marginal(double y) const noexcept;

private:
    double gamma_;
};

struct PreferenceSpec {
    double gamma = 0.5;
    double eta = 1.01;     ///< loss-aversion multiplier
    double epsilon = 0.0;  ///< death probability
    ContractKind kind = ContractKind::Defaultable;

    void validate() const;
};

struct MortalityMix {
    double delta_eps = 0.0;  ///< (1 - tilde_delta)(1 - epsilon) + epsilon

    [[nodiscard]] static MortalityMix of(const ContractParams& c, double epsilon) noexcept;
};

/// Preference specification bound to a contract.
class Preferences {
public:
    Preferences(const PreferenceSpec& spec, const ContractParams& contract);

    [[nodiscard]] const PreferenceSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const ContractParams& contract() const noexcept { return contract_; }
    [[nodiscard]] const CrraUtility& core() const noexcept { return core_; }
    [[nodiscard]] MortalityMix mix() const noexcept { return mix_; }
    [[nodiscard]] double epsilon() const noexcept { return spec_.epsilon; }

    [[nodiscard]] double u(double x) const;
    [[nodiscard]] double u_prime(double x) const;
    [[nodiscard]] double inv_marginal(double y) const;

    /// 1 for the fully protected design, epsilon for the defaultable one.
    [[nodiscard]] double loss_weight() const noexcept;
    /// eta U(m) on a loss magnitude m >= 0.
    [[nodiscard]] double loss_utility(double magnitude) const;
    /// Disutility of ending at wealth l < L_T: loss_weight * loss_utility(L_T - l); +inf when U(0) = -inf.
    [[nodiscard]] double loss_at(double l) const;
    /// q_j = loss_at(0).
    [[nodiscard]] double loss_bound() const { return loss_at(0.0); }

    /// (1-w) U(f(x)) + w U(x - L_T); requires x >= bonus threshold unless w = 1 (then x > L_T).
    [[nodiscard]] double mixed_utility(double x, double w) const;
    [[nodiscard]] double mixed_marginal(double x, double w) const;
    [[nodiscard]] double mixed_curvature(double x, double w) const;

    [[nodiscard]] double u_eps(double x) const;
    [[nodiscard]] double u_eps_prime(double x) const;
    [[nodiscard]] double u_eps_curvature(double x) const;

    /// Largest admissible argument of inv_marginal_eps: U_eps'(bonus threshold).
    [[nodiscard]] double eps_marginal_cap() const noexcept { return eps_cap_; }
    /// Root of U_eps'(x) = y on x >= bonus threshold.
    [[nodiscard]] double inv_marginal_eps(double y) const;
    /// Bracket [lo, hi] guaranteed to contain inv_marginal_eps(y).
    [[nodiscard]] std::pair<double, double> inv_marginal_eps_bounds(double y) const;

    [[nodiscard]] double h_map(double y) const;

    /// Utility of terminal wealth x for the equity holder, mortality mixed.
    [[nodiscard]] double derived_utility(double x) const;

private:
    PreferenceSpec spec_;
    ContractParams contract_;
    CrraUtility core_;
    MortalityMix mix_;
    double eps_cap_;
};

}  // namespace pcopt
