#include "pcopt/market.hpp"

#include "pcopt/errors.hpp"
#include "pcopt/normal.hpp"

#include <cmath>
#include <limits>

namespace pcopt {

void MarketParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("market: sigma must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("market: horizon must be positive");
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("market: r must be non-negative");
    if (!std::isfinite(mu)) throw InvalidArgument("market: mu must be finite");
}

double StatePriceLaw::mean() const noexcept {
    return std::exp(log_mean + 0.5 * log_sd * log_sd);
}

double StatePriceLaw::cdf(double x) const noexcept {
    if (x <= 0.0) return 0.0;
    if (degenerate()) return x > std::exp(log_mean) ? 1.0 : 0.0;
    if (std::isinf(x)) return 1.0;
    return norm_cdf((std::log(x) - log_mean) / log_sd);
}

double StatePriceLaw::sf(double x) const noexcept {
    if (x <= 0.0) return 1.0;
    if (degenerate()) return x < std::exp(log_mean) ? 1.0 : 0.0;
    if (std::isinf(x)) return 0.0;
    return norm_sf((std::log(x) - log_mean) / log_sd);
}

StatePriceLaw state_price_law(const MarketParams& params, double t) {
    params.validate();
    if (!(t > 0.0)) throw InvalidArgument("state_price_law: t must be positive");
    if (t > params.horizon * (1.0 + 1e-15)) throw InvalidArgument("state_price_law: t exceeds horizon");
    const double theta = params.theta();
    return StatePriceLaw{.theta = theta,
                         .log_mean = -(params.r + 0.5 * theta * theta) * t,
                         .log_sd = std::abs(theta) * std::sqrt(t),
                         .t = t};
}

double quantile_upper(const StatePriceLaw& law, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("quantile_upper: beta outside (0, 1)");
    if (law.degenerate()) throw DegenerateMarket("quantile_upper: state-price law is a point mass");
    // z_{1-beta} = -z_beta keeps precision for small beta.
    return std::exp(law.log_mean - law.log_sd * norm_quantile(beta));
}

double partial_power_expectation(const StatePriceLaw& law, double a, double lo, double hi) {
    if (std::isnan(a) || std::isnan(lo) || std::isnan(hi)) throw InvalidArgument("partial_power_expectation: NaN input");
    if (lo < 0.0) throw InvalidArgument("partial_power_expectation: lo must be non-negative");
    if (lo > hi) throw InvalidArgument("partial_power_expectation: lo > hi");
    const double m = law.log_mean;
    const double s = law.log_sd;
    if (law.degenerate()) {
        const double x = std::exp(m);
        return (lo <= x && x < hi) ? std::exp(a * m) : 0.0;
    }
    if (lo == hi) return 0.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double shift = m + a * s * s;
    const double d_lo = lo == 0.0 ? -inf : (std::log(lo) - shift) / s;
    const double d_hi = std::isinf(hi) ? inf : (std::log(hi) - shift) / s;
    const double mass = norm_interval(d_lo, d_hi);
    if (mass == 0.0) return 0.0;
    return std::exp(a * m + 0.5 * a * a * s * s) * mass;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double NormalStream::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::operator()() {
    return norm_quantile(uniform());
}

std::vector<double> sample_xi(const StatePriceLaw& law, std::size_t n, std::uint64_t seed, bool antithetic) {
    if (n == 0) throw InvalidArgument("sample_xi: n must be positive");
    std::vector<double> out(n);
    const double m = law.log_mean;
    const double s = law.log_sd;
    // Block b of kSampleBlock outputs always draws from substream b, so any partition of blocks
    // across workers reproduces the same vector.
    for (std::size_t start = 0, block = 0; start < n; start += kSampleBlock, ++block) {
        NormalStream normals(seed, block);
        const std::size_t end = std::min(n, start + kSampleBlock);
        for (std::size_t i = start; i < end;) {
            const double z = normals();
            out[i++] = std::exp(m + s * z);
            if (antithetic && i < end) out[i++] = std::exp(m - s * z);
        }
    }
    return out;
}

}  // namespace pcopt
