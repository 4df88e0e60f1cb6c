#pragma once

namespace pcopt {

/// Standard normal density.
[[nodiscard]] double norm_pdf(double x) noexcept;

/// Standard normal CDF, accurate in relative terms in the lower tail.
[[nodiscard]] double norm_cdf(double x) noexcept;

/// Upper tail 1 - Phi(x), accurate in relative terms in the upper tail.
[[nodiscard]] double norm_sf(double x) noexcept;

/// Inverse of norm_cdf on (0, 1); returns -inf/+inf at 0/1.
[[nodiscard]] double norm_quantile(double p);

/// P(lo <= Z < hi) evaluated on the side of the distribution that avoids cancellation.
[[nodiscard]] double norm_interval(double lo, double hi) noexcept;

}  // namespace pcopt
