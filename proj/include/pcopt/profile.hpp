#pragma once

#include "pcopt/market.hpp"
#include "pcopt/preferences.hpp"

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace pcopt {

enum class SegmentKind {
    InvMarginalEps,    ///< I_eps(lambda xi), never below the bonus threshold
    ConstantTildeL,    ///< bonus threshold L_T / alpha
    GuaranteePlusInv,  ///< L_T + I(lambda xi)
    ConstantFloor,     ///< portfolio-insurance floor l
    Zero,
};

[[nodiscard]] std::string_view to_string(SegmentKind kind) noexcept;
[[nodiscard]] SegmentKind parse_segment_kind(std::string_view text);

/// X = a + b (lambda xi)^{-1/gamma}.
struct AffinePower {
    double a = 0.0;
    double b = 0.0;
};

/// Piecewise terminal wealth xi -> X(xi). Segment i covers [breakpoint i-1, breakpoint i).
class WealthProfile {
public:
    WealthProfile(Preferences prefs, double lambda, std::vector<double> breakpoints,
                  std::vector<SegmentKind> segments, double floor = 0.0);

    /// Builds from (kind, upper end) pairs, last upper end +inf, dropping empty segments, merging
    /// repeats, and relabelling I_eps as L_T + I when epsilon = 1.
    [[nodiscard]] static WealthProfile build(const Preferences& prefs, double lambda, double floor,
                                             const std::vector<std::pair<SegmentKind, double>>& pieces);

    [[nodiscard]] double operator()(double xi) const;
    [[nodiscard]] std::size_t segment_index(double xi) const;
    [[nodiscard]] double segment_value(std::size_t i, double xi) const;
    /// dX/dxi inside segment i.
    [[nodiscard]] double segment_slope(std::size_t i, double xi) const;
    [[nodiscard]] std::optional<AffinePower> affine_power(std::size_t i) const;
    [[nodiscard]] double lower(std::size_t i) const;
    [[nodiscard]] double upper(std::size_t i) const;
    /// xi above which I_eps would fall below the bonus threshold.
    [[nodiscard]] double eps_cap_xi() const noexcept;

    [[nodiscard]] const Preferences& preferences() const noexcept { return prefs_; }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double floor() const noexcept { return floor_; }
    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    [[nodiscard]] const std::vector<SegmentKind>& segments() const noexcept { return segments_; }

private:
    Preferences prefs_;
    double lambda_;
    std::vector<double> breakpoints_;
    std::vector<SegmentKind> segments_;
    double floor_;
};

enum class ExpectationMethod { Auto, Quadrature };

struct DiscountedValue {
    double value = 0.0;  ///< E[R X(scale R)]
    double delta = 0.0;  ///< scale * d value / d scale
};

/// Expectation of R X(scale R) for R distributed as `law`; with scale 1 and the time-T law
/// this is the budget cost E[xi_T X(xi_T)].
[[nodiscard]] DiscountedValue discounted_value(const WealthProfile& profile, const StatePriceLaw& law, double scale,
                                               bool with_delta, ExpectationMethod method = ExpectationMethod::Auto);

}  // namespace pcopt
