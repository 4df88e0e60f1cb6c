#pragma once

#include "pcopt/preferences.hpp"

#include <optional>
#include <string_view>

namespace pcopt {

enum class CaseClass { FourRegion, ThreeRegion, TwoRegion };

[[nodiscard]] std::string_view to_string(CaseClass c) noexcept;

enum class Branch { One, Eps };

/// Breakpoints of the optimal profile in xi for a given lambda; all scale as 1/lambda.
struct Thresholds {
    double xi_tildeL = 0.0;  ///< U_eps'(bonus threshold) / lambda
    double xi_hatL = 0.0;    ///< U'(gap) / lambda
    std::optional<double> xi_U;
    std::optional<double> xi_hat_1;
    std::optional<double> xi_hat_eps;

    /// Start of the loss region: whichever of xi_hat_1, xi_U, xi_hat_eps is present.
    [[nodiscard]] double loss_start() const;
};

/// U_w(x) - U_w'(x)(x - l) + q on branch weight w (w = 1 is the U(x - L_T) branch).
[[nodiscard]] double upsilon(const Preferences& prefs, double x, double eps_weight, double q, double l = 0.0);

/// Root of the branch equation; One in (L_T, bonus threshold), Eps above the bonus threshold.
[[nodiscard]] double tangency_point(const Preferences& prefs, Branch branch, double q, double l = 0.0);

/// Case classification and tangency points for loss bound q and reference point l < L_T.
struct Concavification {
    CaseClass case_class = CaseClass::FourRegion;
    double q = 0.0;
    double l = 0.0;
    double y_hat = 0.0;  ///< tangency point of the active branch; L_T when q is infinite
    double upsilon_one = 0.0;
    double upsilon_eps = 0.0;
    double u_gap = 0.0;          ///< U(gap)
    double marginal_gap = 0.0;   ///< U'(gap)
    double marginal_eps = 0.0;   ///< U_eps'(bonus threshold)
    double marginal_hat = 0.0;   ///< marginal utility at the tangency point
    double bonus_threshold = 0.0;

    [[nodiscard]] Thresholds thresholds(double lambda) const;
};

[[nodiscard]] Concavification classify(const Preferences& prefs, double q, double l = 0.0);

}  // namespace pcopt
