#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pcopt {

/// Constant-coefficient Black-Scholes market.
struct MarketParams {
    double mu = 0.05;
    double r = 0.03;
    double sigma = 0.3;
    double horizon = 10.0;

    /// Throws InvalidArgument unless sigma > 0, horizon > 0 and r >= 0.
    void validate() const;
    [[nodiscard]] double theta() const noexcept { return (mu - r) / sigma; }
};

/// Law of xi_t: ln xi_t ~ N(log_mean, log_sd^2).
struct StatePriceLaw {
    double theta = 0.0;
    double log_mean = 0.0;
    double log_sd = 0.0;
    double t = 0.0;

    /// Point mass at exp(log_mean) when theta = 0.
    [[nodiscard]] bool degenerate() const noexcept { return log_sd == 0.0; }
    [[nodiscard]] double mean() const noexcept;
    /// P(xi_t < x).
    [[nodiscard]] double cdf(double x) const noexcept;
    /// P(xi_t > x).
    [[nodiscard]] double sf(double x) const noexcept;
};

[[nodiscard]] StatePriceLaw state_price_law(const MarketParams& params, double t);

/// The xi_bar with P(xi_t > xi_bar) = beta.
[[nodiscard]] double quantile_upper(const StatePriceLaw& law, double beta);

/// E[xi_t^a 1{lo <= xi_t < hi}]; hi may be +inf.
[[nodiscard]] double partial_power_expectation(const StatePriceLaw& law, double a, double lo, double hi);

/// Reproducible stream of standard normals for substream `stream` of `seed`.
/// Draws use inverse-CDF mapping of 53-bit uniforms, so they are identical on every platform
/// that shares std::mt19937_64.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);
    [[nodiscard]] double operator()();
    [[nodiscard]] double uniform();

private:
    std::mt19937_64 engine_;
};

/// Samples drawn in blocks of this size; block b uses substream b.
inline constexpr std::size_t kSampleBlock = 1u << 14;

/// n draws of xi_t. With antithetic on, entries 2k and 2k+1 are exp(m +- s z_k).
[[nodiscard]] std::vector<double> sample_xi(const StatePriceLaw& law, std::size_t n, std::uint64_t seed,
                                            bool antithetic);

}  // namespace pcopt
