#include "pcopt/preferences.hpp"

#include "pcopt/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

namespace pcopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack accepted at the edge of an admissible range (rounding in thresholds).
constexpr double kEdgeSlack = 1e-12;
}  // namespace

CrraUtility::CrraUtility(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("utility: gamma must be positive");
}

double CrraUtility::value(double x) const noexcept {
    if (x == 0.0) return bounded_below() ? 0.0 : -kInf;
    if (gamma_ == 0.5) return 2.0 * std::sqrt(x);
    if (is_log()) return std::log(x);
    return std::pow(x, 1.0 - gamma_) / (1.0 - gamma_);
}

double CrraUtility::marginal(double x) const noexcept {
    if (gamma_ == 0.5) return 1.0 / std::sqrt(x);
    if (is_log()) return 1.0 / x;
    return std::pow(x, -gamma_);
}

double CrraUtility::curvature(double x) const noexcept {
    return -gamma_ * marginal(x) / x;
}

double CrraUtility::inverse_marginal(double y) const noexcept {
    if (gamma_ == 0.5) return 1.0 / (y * y);
    if (is_log()) return 1.0 / y;
    return std::pow(y, -1.0 / gamma_);
}

void PreferenceSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("preferences: gamma must be positive");
    if (!(eta >= 1.0) || !std::isfinite(eta)) throw InvalidArgument("preferences: eta must be at least 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("preferences: epsilon must lie in [0, 1]");
}

MortalityMix MortalityMix::of(const ContractParams& c, double epsilon) noexcept {
    return MortalityMix{.delta_eps = (1.0 - c.tilde_delta) * (1.0 - epsilon) + epsilon};
}

Preferences::Preferences(const PreferenceSpec& spec, const ContractParams& contract)
    : spec_(spec), contract_(contract), core_(spec.gamma), mix_(MortalityMix::of(contract, spec.epsilon)) {
    spec_.validate();
    eps_cap_ = mix_.delta_eps * core_.marginal(contract_.gap);
}

double Preferences::u(double x) const {
    if (!(x > 0.0)) throw InvalidArgument("u: argument must be positive");
    return core_.value(x);
}

double Preferences::u_prime(double x) const {
    if (!(x > 0.0)) throw InvalidArgument("u_prime: argument must be positive");
    return core_.marginal(x);
}

double Preferences::inv_marginal(double y) const {
    if (!(y > 0.0)) throw InvalidArgument("inv_marginal: argument must be positive");
    return core_.inverse_marginal(y);
}

double Preferences::loss_weight() const noexcept {
    return spec_.kind == ContractKind::FullyProtected ? 1.0 : spec_.epsilon;
}

double Preferences::loss_utility(double magnitude) const {
    if (!(magnitude >= 0.0)) throw InvalidArgument("loss_utility: magnitude must be non-negative");
    return spec_.eta * core_.value(magnitude);
}

double Preferences::loss_at(double l) const {
    const double lt = contract_.guarantee;
    if (l >= lt) return 0.0;
    // Without a finite U(0) every loss state is infinitely bad, whatever its weight.
    if (!core_.bounded_below()) return kInf;
    return loss_weight() * loss_utility(lt - l);
}

double Preferences::mixed_utility(double x, double w) const {
    const double lt = contract_.guarantee;
    if (w == 1.0) {
        if (!(x > lt)) throw InvalidArgument("mixed_utility: wealth must exceed the guarantee");
        return core_.value(x - lt);
    }
    if (x < contract_.bonus_threshold * (1.0 - kEdgeSlack))
        throw InvalidArgument("mixed_utility: wealth below the bonus threshold");
    const double fx = f_slope(contract_, x);
    const double upper = w == 0.0 ? 0.0 : w * core_.value(x - lt);
    return (1.0 - w) * core_.value(fx) + upper;
}

double Preferences::mixed_marginal(double x, double w) const {
    const double lt = contract_.guarantee;
    if (w == 1.0) {
        if (!(x > lt)) throw InvalidArgument("mixed_marginal: wealth must exceed the guarantee");
        return core_.marginal(x - lt);
    }
    if (x < contract_.bonus_threshold * (1.0 - kEdgeSlack))
        throw InvalidArgument("mixed_marginal: wealth below the bonus threshold");
    const double fx = f_slope(contract_, x);
    const double upper = w == 0.0 ? 0.0 : w * core_.marginal(x - lt);
    return (1.0 - w) * (1.0 - contract_.tilde_delta) * core_.marginal(fx) + upper;
}

double Preferences::mixed_curvature(double x, double w) const {
    const double lt = contract_.guarantee;
    if (w == 1.0) return core_.curvature(x - lt);
    const double slope = 1.0 - contract_.tilde_delta;
    const double upper = w == 0.0 ? 0.0 : w * core_.curvature(x - lt);
    return (1.0 - w) * slope * slope * core_.curvature(f_slope(contract_, x)) + upper;
}

double Preferences::u_eps(double x) const {
    if (x < contract_.bonus_threshold * (1.0 - kEdgeSlack)) throw InvalidArgument("u_eps: wealth below the bonus threshold");
    return mixed_utility(x, spec_.epsilon);
}

double Preferences::u_eps_prime(double x) const {
    if (x < contract_.bonus_threshold * (1.0 - kEdgeSlack))
        throw InvalidArgument("u_eps_prime: wealth below the bonus threshold");
    return mixed_marginal(x, spec_.epsilon);
}

double Preferences::u_eps_curvature(double x) const {
    return mixed_curvature(x, spec_.epsilon);
}

double Preferences::h_map(double y) const {
    const double cap = (1.0 - contract_.tilde_delta) * core_.marginal(contract_.gap);
    if (!(y > 0.0) || y > cap * (1.0 + kEdgeSlack)) throw InvalidArgument("h_map: argument outside (0, cap]");
    const double slope = 1.0 - contract_.tilde_delta;
    return (core_.inverse_marginal(y / slope) + (1.0 - contract_.delta) * contract_.guarantee) / slope;
}

std::pair<double, double> Preferences::inv_marginal_eps_bounds(double y) const {
    const double base = core_.inverse_marginal(y / mix_.delta_eps);
    const double lo = contract_.guarantee + base;
    const double hi = (base + (1.0 - contract_.delta) * contract_.guarantee) / (1.0 - contract_.tilde_delta);
    const double floor = contract_.bonus_threshold;
    return {std::max(lo, floor), std::max(hi, floor)};
}

double Preferences::inv_marginal_eps(double y) const {
    if (!(y > 0.0) || y > eps_cap_ * (1.0 + kEdgeSlack))
        throw InvalidArgument("inv_marginal_eps: argument outside (0, U_eps'(bonus threshold)]");
    if (y >= eps_cap_) return contract_.bonus_threshold;
    const double eps = spec_.epsilon;
    if (eps == 0.0) return h_map(y);
    if (eps == 1.0) return contract_.guarantee + core_.inverse_marginal(y);
    auto [lo, hi] = inv_marginal_eps_bounds(y);
    if (hi <= lo) return lo;
    // U_eps' is convex and decreasing, so Newton from the lower bound converges monotonically;
    // the bracketed iterate falls back to bisection if rounding ever pushes it outside.
    auto fn = [&](double x) {
        return std::pair<double, double>{mixed_marginal(x, eps) - y, mixed_curvature(x, eps)};
    };
    std::uintmax_t iters = 200;
    const double x = boost::math::tools::newton_raphson_iterate(fn, lo, lo, hi, 52, iters);
    const double resid = std::abs(mixed_marginal(x, eps) - y) / y;
    if (!(resid <= 1e-10)) throw NumericalFailure("inv_marginal_eps: residual above tolerance");
    return x;
}

double Preferences::derived_utility(double x) const {
    if (!(x >= 0.0)) throw InvalidArgument("derived_utility: wealth must be non-negative");
    const double lt = contract_.guarantee;
    if (x <= lt) {
        if (!core_.bounded_below()) return -kInf;
        return -loss_weight() * loss_utility(lt - x);
    }
    if (x <= contract_.bonus_threshold) return core_.value(x - lt);
    return mixed_utility(x, spec_.epsilon);
}

}  // namespace pcopt
