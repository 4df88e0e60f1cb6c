#include "pcopt/profile.hpp"

#include "pcopt/errors.hpp"
#include "pcopt/normal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pcopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Half-width, in standard deviations, of the integration window around the integrand peaks.
constexpr double kWindow = 14.0;
constexpr double kQuadTol = 1e-12;
}  // namespace

std::string_view to_string(SegmentKind kind) noexcept {
    switch (kind) {
        case SegmentKind::InvMarginalEps: return "inv_marginal_eps";
        case SegmentKind::ConstantTildeL: return "bonus_threshold";
        case SegmentKind::GuaranteePlusInv: return "guarantee_plus_inv";
        case SegmentKind::ConstantFloor: return "floor";
        case SegmentKind::Zero: return "zero";
    }
    return "unknown";
}

SegmentKind parse_segment_kind(std::string_view text) {
    for (auto k : {SegmentKind::InvMarginalEps, SegmentKind::ConstantTildeL, SegmentKind::GuaranteePlusInv,
                   SegmentKind::ConstantFloor, SegmentKind::Zero})
        if (to_string(k) == text) return k;
    throw InvalidArgument("unknown segment kind '" + std::string(text) + "'");
}

WealthProfile::WealthProfile(Preferences prefs, double lambda, std::vector<double> breakpoints,
                             std::vector<SegmentKind> segments, double floor)
    : prefs_(std::move(prefs)),
      lambda_(lambda),
      breakpoints_(std::move(breakpoints)),
      segments_(std::move(segments)),
      floor_(floor) {
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw InvalidArgument("profile: lambda must be positive");
    if (!(floor_ >= 0.0) || !std::isfinite(floor_)) throw InvalidArgument("profile: floor must be non-negative");
    if (segments_.size() != breakpoints_.size() + 1) throw InvalidArgument("profile: need one more segment than breakpoints");
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        const double b = breakpoints_[i];
        if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("profile: breakpoints must be positive and finite");
        if (i > 0 && !(b > breakpoints_[i - 1])) throw InvalidArgument("profile: breakpoints must increase strictly");
    }
}

WealthProfile WealthProfile::build(const Preferences& prefs, double lambda, double floor,
                                   const std::vector<std::pair<SegmentKind, double>>& pieces) {
    std::vector<double> bps;
    std::vector<SegmentKind> segs;
    double lower = 0.0;
    for (auto [kind, upper] : pieces) {
        if (kind == SegmentKind::InvMarginalEps && prefs.epsilon() == 1.0) kind = SegmentKind::GuaranteePlusInv;
        if (kind == SegmentKind::ConstantFloor && floor == 0.0) kind = SegmentKind::Zero;
        if (!(upper > lower)) continue;
        if (!segs.empty() && segs.back() == kind) {
            bps.back() = upper;
        } else {
            segs.push_back(kind);
            bps.push_back(upper);
        }
        lower = upper;
        if (std::isinf(upper)) break;
    }
    if (segs.empty() || !std::isinf(bps.back())) throw InvalidArgument("profile: last piece must extend to infinity");
    bps.pop_back();
    return WealthProfile(prefs, lambda, std::move(bps), std::move(segs), floor);
}

std::size_t WealthProfile::segment_index(double xi) const {
    return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), xi) -
                                    breakpoints_.begin());
}

double WealthProfile::lower(std::size_t i) const {
    return i == 0 ? 0.0 : breakpoints_[i - 1];
}

double WealthProfile::upper(std::size_t i) const {
    return i < breakpoints_.size() ? breakpoints_[i] : kInf;
}

double WealthProfile::eps_cap_xi() const noexcept {
    return prefs_.eps_marginal_cap() / lambda_;
}

double WealthProfile::segment_value(std::size_t i, double xi) const {
    const auto& c = prefs_.contract();
    switch (segments_.at(i)) {
        case SegmentKind::InvMarginalEps: {
            const double y = lambda_ * xi;
            if (y >= prefs_.eps_marginal_cap()) return c.bonus_threshold;
            return prefs_.inv_marginal_eps(y);
        }
        case SegmentKind::ConstantTildeL: return c.bonus_threshold;
        case SegmentKind::GuaranteePlusInv: return c.guarantee + prefs_.core().inverse_marginal(lambda_ * xi);
        case SegmentKind::ConstantFloor: return floor_;
        case SegmentKind::Zero: return 0.0;
    }
    return 0.0;
}

double WealthProfile::segment_slope(std::size_t i, double xi) const {
    const double gamma = prefs_.core().gamma();
    switch (segments_.at(i)) {
        case SegmentKind::InvMarginalEps: {
            const double y = lambda_ * xi;
            if (y >= prefs_.eps_marginal_cap()) return 0.0;
            return lambda_ / prefs_.u_eps_curvature(prefs_.inv_marginal_eps(y));
        }
        case SegmentKind::GuaranteePlusInv: {
            const double y = lambda_ * xi;
            return -lambda_ * prefs_.core().inverse_marginal(y) / (gamma * y);
        }
        default: return 0.0;
    }
}

std::optional<AffinePower> WealthProfile::affine_power(std::size_t i) const {
    const auto& c = prefs_.contract();
    const double gamma = prefs_.core().gamma();
    switch (segments_.at(i)) {
        case SegmentKind::InvMarginalEps: {
            const double eps = prefs_.epsilon();
            if (eps == 1.0) return AffinePower{c.guarantee, 1.0};
            if (eps != 0.0) return std::nullopt;
            const double slope = 1.0 - c.tilde_delta;
            return AffinePower{(1.0 - c.delta) * c.guarantee / slope, std::pow(slope, 1.0 / gamma - 1.0)};
        }
        case SegmentKind::ConstantTildeL: return AffinePower{c.bonus_threshold, 0.0};
        case SegmentKind::GuaranteePlusInv: return AffinePower{c.guarantee, 1.0};
        case SegmentKind::ConstantFloor: return AffinePower{floor_, 0.0};
        case SegmentKind::Zero: return AffinePower{0.0, 0.0};
    }
    return std::nullopt;
}

double WealthProfile::operator()(double xi) const {
    if (!(xi > 0.0)) throw InvalidArgument("profile: xi must be positive");
    return segment_value(segment_index(xi), xi);
}

namespace {

// Interval of a segment after splitting I_eps where it reaches the bonus threshold.
struct Piece {
    double lo;
    double hi;
    std::size_t segment;
    bool clamped;  // I_eps segment above its cap: constant bonus threshold
};

std::vector<Piece> split_pieces(const WealthProfile& p) {
    std::vector<Piece> out;
    const double cap = p.eps_cap_xi();
    for (std::size_t i = 0; i < p.segments().size(); ++i) {
        const double lo = p.lower(i);
        const double hi = p.upper(i);
        if (p.segments()[i] == SegmentKind::InvMarginalEps && hi > cap) {
            if (lo < cap) out.push_back({lo, cap, i, false});
            out.push_back({std::max(lo, cap), hi, i, true});
        } else {
            out.push_back({lo, hi, i, false});
        }
    }
    return out;
}

// K scale^p xi-term: E[R K (scale R)^p 1{lo <= scale R < hi}] and the interior part of its log-scale
// derivative. Moving endpoints are accounted for once per breakpoint in discounted_value.
DiscountedValue power_term(const StatePriceLaw& law, double k, double p, double scale, double lo, double hi,
                           bool with_delta) {
    if (k == 0.0) return {};
    const double coef = k * std::pow(scale, p);
    const double v = coef * partial_power_expectation(law, 1.0 + p, lo / scale, hi / scale);
    return {v, with_delta ? p * v : 0.0};
}

DiscountedValue closed_form_piece(const WealthProfile& p, const Piece& piece, const AffinePower& ap,
                                  const StatePriceLaw& law, double scale, bool with_delta) {
    const double gamma = p.preferences().core().gamma();
    const auto t0 = power_term(law, ap.a, 0.0, scale, piece.lo, piece.hi, with_delta);
    const auto t1 = power_term(law, ap.b * std::pow(p.lambda(), -1.0 / gamma), -1.0 / gamma, scale, piece.lo,
                               piece.hi, with_delta);
    return {t0.value + t1.value, t0.delta + t1.delta};
}

DiscountedValue quadrature_piece(const WealthProfile& p, const Piece& piece, const StatePriceLaw& law,
                                 double scale, bool with_delta) {
    const double m = law.log_mean;
    const double s = law.log_sd;
    const double gamma = p.preferences().core().gamma();
    const std::size_t seg = piece.segment;
    const double bonus = p.preferences().contract().bonus_threshold;
    auto value_at = [&](double xi) { return piece.clamped ? bonus : p.segment_value(seg, xi); };
    auto slope_at = [&](double xi) { return piece.clamped ? 0.0 : p.segment_slope(seg, xi); };

    if (s == 0.0) {
        const double r = std::exp(m);
        const double xi = scale * r;
        if (!(piece.lo <= xi && xi < piece.hi)) return {};
        return {r * value_at(xi), with_delta ? r * xi * slope_at(xi) : 0.0};
    }
    const double c_lo = std::min(s, (1.0 - 1.0 / gamma) * s) - kWindow;
    const double c_hi = std::max(s, (1.0 - 1.0 / gamma) * s) + kWindow;
    const double z_lo_raw = piece.lo > 0.0 ? (std::log(piece.lo / scale) - m) / s : -kInf;
    const double z_hi_raw = std::isfinite(piece.hi) ? (std::log(piece.hi / scale) - m) / s : kInf;
    const double z_lo = std::max(z_lo_raw, c_lo);
    const double z_hi = std::min(z_hi_raw, c_hi);
    if (!(z_lo < z_hi)) return {};

    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto integrand = [&](double z) {
        const double r = std::exp(m + s * z);
        return r * value_at(scale * r) * norm_pdf(z);
    };
    DiscountedValue out;
    out.value = Rule::integrate(integrand, z_lo, z_hi, 20, kQuadTol);
    if (with_delta) {
        auto d_integrand = [&](double z) {
            const double r = std::exp(m + s * z);
            const double xi = scale * r;
            return r * xi * slope_at(xi) * norm_pdf(z);
        };
        out.delta = Rule::integrate(d_integrand, z_lo, z_hi, 20, kQuadTol);
    }
    return out;
}

}  // namespace

DiscountedValue discounted_value(const WealthProfile& profile, const StatePriceLaw& law, double scale,
                                 bool with_delta, ExpectationMethod method) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("discounted_value: scale must be positive");
    DiscountedValue total;
    const auto& c = profile.preferences().contract();
    for (const auto& piece : split_pieces(profile)) {
        if (!(piece.lo < piece.hi)) continue;
        DiscountedValue part;
        std::optional<AffinePower> ap =
            piece.clamped ? std::optional<AffinePower>(AffinePower{c.bonus_threshold, 0.0}) : profile.affine_power(piece.segment);
        if (method == ExpectationMethod::Auto && ap) {
            part = closed_form_piece(profile, piece, *ap, law, scale, with_delta);
        } else {
            part = quadrature_piece(profile, piece, law, scale, with_delta);
        }
        total.value += part.value;
        total.delta += part.delta;
    }
    // Each breakpoint b moves with the scale and carries the jump X(b-) - X(b+) times the density there.
    if (with_delta && law.log_sd > 0.0) {
        const auto& bps = profile.breakpoints();
        for (std::size_t i = 0; i < bps.size(); ++i) {
            const double jump = std::max(0.0, profile.segment_value(i, bps[i]) - profile.segment_value(i + 1, bps[i]));
            if (jump == 0.0) continue;
            const double r = bps[i] / scale;
            total.delta -= jump * r * norm_pdf((std::log(r) - law.log_mean) / law.log_sd) / law.log_sd;
        }
    }
    return total;
}

}  // namespace pcopt
