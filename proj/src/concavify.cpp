#include "pcopt/concavify.hpp"

#include "pcopt/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

namespace pcopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(CaseClass c) noexcept {
    switch (c) {
        case CaseClass::FourRegion: return "four_region";
        case CaseClass::ThreeRegion: return "three_region";
        case CaseClass::TwoRegion: return "two_region";
    }
    return "unknown";
}

double Thresholds::loss_start() const {
    if (xi_hat_1) return *xi_hat_1;
    if (xi_U) return *xi_U;
    if (xi_hat_eps) return *xi_hat_eps;
    return kInf;
}

double upsilon(const Preferences& prefs, double x, double eps_weight, double q, double l) {
    if (!(eps_weight >= 0.0 && eps_weight <= 1.0)) throw InvalidArgument("upsilon: weight outside [0, 1]");
    return prefs.mixed_utility(x, eps_weight) - prefs.mixed_marginal(x, eps_weight) * (x - l) + q;
}

namespace {

double solve_bracketed(auto&& fn, double lo, double hi, double flo, double fhi) {
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, iters);
    return 0.5 * (a + b);
}

}  // namespace

double tangency_point(const Preferences& prefs, Branch branch, double q, double l) {
    const auto& c = prefs.contract();
    const double lt = c.guarantee;
    const double lb = c.bonus_threshold;
    if (!(q >= 0.0) || !std::isfinite(q)) throw InvalidArgument("tangency_point: q must be finite and non-negative");
    if (!(l >= 0.0 && l < lt)) throw InvalidArgument("tangency_point: reference point must lie in [0, L_T)");
    if (branch == Branch::One) {
        auto fn = [&](double x) { return upsilon(prefs, x, 1.0, q, l); };
        const double top = fn(lb);
        if (!(top > 0.0)) throw InvalidArgument("tangency_point: branch one needs a positive value at the bonus threshold");
        // Walk towards L_T until the sign flips; Inada drives the value to -inf there.
        double hi = lb;
        double fhi = top;
        for (int k = 1; k <= 200; ++k) {
            const double lo = lt + (lb - lt) * std::ldexp(1.0, -k);
            if (!(lo > lt)) break;
            const double flo = fn(lo);
            if (flo < 0.0) {
                const double y = solve_bracketed(fn, lo, hi, flo, fhi);
                if (!(std::abs(fn(y)) <= 1e-10 * (1.0 + q))) throw NumericalFailure("tangency_point: residual too large");
                return y;
            }
            if (flo == 0.0) return lo;
            hi = lo;
            fhi = flo;
        }
        throw NumericalFailure("tangency_point: no bracket for branch one");
    }
    const double eps = prefs.epsilon();
    auto fn = [&](double x) { return upsilon(prefs, x, eps, q, l); };
    const double flo = fn(lb);
    if (!(flo < 0.0)) throw InvalidArgument("tangency_point: branch eps needs a negative value at the bonus threshold");
    double lo = lb;
    double f_lo = flo;
    for (int k = 1; k <= 60; ++k) {
        const double hi = lb * std::ldexp(1.0, k);
        const double fhi = fn(hi);
        if (fhi >= 0.0) {
            if (fhi == 0.0) return hi;
            const double y = solve_bracketed(fn, lo, hi, f_lo, fhi);
            if (!(std::abs(fn(y)) <= 1e-10 * (1.0 + q))) throw NumericalFailure("tangency_point: residual too large");
            return y;
        }
        lo = hi;
        f_lo = fhi;
    }
    throw NumericalFailure("tangency_point: no bracket for branch eps within 2^60");
}

Concavification classify(const Preferences& prefs, double q, double l) {
    const auto& c = prefs.contract();
    const auto& u = prefs.core();
    Concavification out;
    out.q = q;
    out.l = l;
    out.bonus_threshold = c.bonus_threshold;
    out.u_gap = u.value(c.gap);
    out.marginal_gap = u.marginal(c.gap);
    out.marginal_eps = prefs.eps_marginal_cap();
    if (std::isinf(q)) {
        // U(0) = -inf: every loss state is dominated, no concavification region.
        out.case_class = CaseClass::FourRegion;
        out.upsilon_one = out.upsilon_eps = kInf;
        out.y_hat = c.guarantee;
        out.marginal_hat = kInf;
        return out;
    }
    out.upsilon_one = upsilon(prefs, c.bonus_threshold, 1.0, q, l);
    out.upsilon_eps = upsilon(prefs, c.bonus_threshold, prefs.epsilon(), q, l);
    if (out.upsilon_one > 0.0) {
        out.case_class = CaseClass::FourRegion;
        out.y_hat = tangency_point(prefs, Branch::One, q, l);
        out.marginal_hat = u.marginal(out.y_hat - c.guarantee);
    } else if (out.upsilon_eps >= 0.0) {
        out.case_class = CaseClass::ThreeRegion;
        out.y_hat = c.bonus_threshold;
        out.marginal_hat = (out.u_gap + q) / (c.bonus_threshold - l);
    } else {
        out.case_class = CaseClass::TwoRegion;
        out.y_hat = tangency_point(prefs, Branch::Eps, q, l);
        out.marginal_hat = prefs.u_eps_prime(out.y_hat);
    }
    return out;
}

Thresholds Concavification::thresholds(double lambda) const {
    if (!(lambda > 0.0)) throw InvalidArgument("thresholds: lambda must be positive");
    Thresholds t;
    t.xi_tildeL = marginal_eps / lambda;
    t.xi_hatL = marginal_gap / lambda;
    const double hat = marginal_hat / lambda;
    switch (case_class) {
        case CaseClass::FourRegion: t.xi_hat_1 = hat; break;
        case CaseClass::ThreeRegion: t.xi_U = hat; break;
        case CaseClass::TwoRegion: t.xi_hat_eps = hat; break;
    }
    return t;
}

}  // namespace pcopt
