#pragma once

#include "pcopt/solver.hpp"

#include <cmath>
#include <optional>

namespace pcopt::testing {

/// Market and contract used throughout the numerical study.
inline MarketParams study_market() {
    return MarketParams{.mu = 0.05, .r = 0.03, .sigma = 0.3, .horizon = 10.0};
}

inline ContractParams study_contract(std::optional<double> alpha = std::nullopt, double delta = 0.6) {
    return ContractParams::make(50.0, 50.0, alpha, delta, 0.02, 10.0);
}

inline PreferenceSpec study_spec(ContractKind kind = ContractKind::Defaultable, double epsilon = 0.0,
                                 double gamma = 0.5, double eta = 1.01) {
    return PreferenceSpec{.gamma = gamma, .eta = eta, .epsilon = epsilon, .kind = kind};
}

inline double rel(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace pcopt::testing
