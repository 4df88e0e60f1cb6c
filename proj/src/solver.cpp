#include "pcopt/solver.hpp"

#include "pcopt/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace pcopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBudgetTol = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

void validate(const ConstraintSpec& constraint) {
    std::visit(Overloaded{[](const Unconstrained&) {},
                          [](const VaRConstraint& v) {
                              if (!(v.beta > 0.0 && v.beta < 1.0)) throw InvalidArgument("VaR: beta outside (0, 1)");
                          },
                          [](const PortfolioInsurance& p) {
                              if (!(p.floor >= 0.0) || !std::isfinite(p.floor))
                                  throw InvalidArgument("PI: floor must be non-negative");
                          }},
               constraint);
}

std::string describe(const ConstraintSpec& constraint) {
    std::ostringstream os;
    std::visit(Overloaded{[&](const Unconstrained&) { os << "none"; },
                          [&](const VaRConstraint& v) { os << "var(beta=" << v.beta << ")"; },
                          [&](const PortfolioInsurance& p) { os << "pi(floor=" << p.floor << ")"; }},
               constraint);
    return os.str();
}

Regime::Regime(const MarketParams& market, const ContractParams& contract, const PreferenceSpec& spec,
               ConstraintSpec constraint)
    : market_(market),
      prefs_(spec, contract),
      law_(state_price_law(market, market.horizon)),
      constraint_(constraint) {
    validate(constraint_);
    if (law_.degenerate()) throw DegenerateMarket("solve: zero market price of risk");
    if (const auto* pi = std::get_if<PortfolioInsurance>(&constraint_)) floor_ = pi->floor;
    if (const auto* var = std::get_if<VaRConstraint>(&constraint_)) xi_bar_ = quantile_upper(law_, var->beta);
    if (floor_ < contract.guarantee) {
        q_ = prefs_.loss_at(floor_);
        conc_ = classify(prefs_, q_, floor_);
    }
}

std::optional<CaseClass> Regime::case_class() const {
    if (!conc_) return std::nullopt;
    return conc_->case_class;
}

Thresholds Regime::thresholds(double lambda) const {
    if (!(lambda > 0.0)) throw InvalidArgument("thresholds: lambda must be positive");
    if (conc_) return conc_->thresholds(lambda);
    Thresholds t;
    t.xi_tildeL = prefs_.eps_marginal_cap() / lambda;
    t.xi_hatL = prefs_.core().marginal(contract().gap) / lambda;
    return t;
}

double Regime::candidate(double lambda, double xi) const {
    const double y = lambda * xi;
    const auto& c = contract();
    if (y < prefs_.eps_marginal_cap()) return prefs_.inv_marginal_eps(y);
    if (y < prefs_.core().marginal(c.gap)) return c.bonus_threshold;
    return c.guarantee + prefs_.core().inverse_marginal(y);
}

double Regime::advantage(double lambda, double xi) const {
    if (std::isinf(q_)) return kInf;
    const double y = lambda * xi;
    const auto& c = contract();
    const auto& u = prefs_.core();
    const double base = q_ + y * floor_;
    if (y < prefs_.eps_marginal_cap()) {
        const double x = prefs_.inv_marginal_eps(y);
        return prefs_.u_eps(x) - y * x + base;
    }
    if (y < u.marginal(c.gap)) return u.value(c.gap) - y * c.bonus_threshold + base;
    const double i = u.inverse_marginal(y);
    return u.value(i) - y * (i + c.guarantee) + base;
}

double Regime::floor_start(double lambda) const {
    if (!(lambda > 0.0)) throw InvalidArgument("floor_start: lambda must be positive");
    const auto& c = contract();
    if (conc_) return conc_->thresholds(lambda).loss_start();
    if (floor_ < c.bonus_threshold) {
        if (floor_ == c.guarantee) return kInf;
        return prefs_.core().marginal(floor_ - c.guarantee) / lambda;
    }
    return prefs_.u_eps_prime(floor_) / lambda;
}

double Regime::cut(double lambda) const {
    const double start = floor_start(lambda);
    return xi_bar_ ? std::max(start, *xi_bar_) : start;
}

bool Regime::binding(double lambda) const {
    return xi_bar_ && floor_start(lambda) < *xi_bar_;
}

double Regime::lambda2(double lambda) const {
    if (!binding(lambda)) return 0.0;
    // Case table on the region containing xi_bar: minus the advantage of I_eps, the bonus
    // threshold or L_T + I there.
    const double xb = *xi_bar_;
    const double y = lambda * xb;
    const auto& c = contract();
    const auto& u = prefs_.core();
    double delta_value = 0.0;
    if (y < prefs_.eps_marginal_cap()) {
        const double x = prefs_.inv_marginal_eps(y);
        delta_value = prefs_.u_eps(x) - y * x + q_;
    } else if (y < u.marginal(c.gap)) {
        delta_value = u.value(c.gap) - y * c.bonus_threshold + q_;
    } else {
        const double i = u.inverse_marginal(y);
        delta_value = u.value(i) - y * (i + c.guarantee) + q_;
    }
    return std::max(0.0, -delta_value);
}

double Regime::pointwise_argmax(double lambda, double xi) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("pointwise_argmax: lambda must be positive");
    if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidArgument("pointwise_argmax: xi must be positive");
    const double x = candidate(lambda, xi);
    if (!conc_) return std::max(x, floor_);
    return advantage(lambda, xi) + lambda2(lambda) >= 0.0 ? x : floor_;
}

WealthProfile Regime::profile(double lambda, double breakpoint_scale) const {
    const Thresholds t = thresholds(lambda);
    double cut_xi = floor_start(lambda) * breakpoint_scale;
    if (xi_bar_) cut_xi = std::max(cut_xi, *xi_bar_);
    const double t1 = std::min(t.xi_tildeL * breakpoint_scale, cut_xi);
    const double t2 = std::min(t.xi_hatL * breakpoint_scale, cut_xi);
    return WealthProfile::build(prefs_, lambda, floor_,
                                {{SegmentKind::InvMarginalEps, t1},
                                 {SegmentKind::ConstantTildeL, t2},
                                 {SegmentKind::GuaranteePlusInv, cut_xi},
                                 {SegmentKind::ConstantFloor, kInf}});
}

double Regime::min_budget() const {
    const auto& c = contract();
    const double discount = std::exp(-market_.r * market_.horizon);
    if (floor_ >= c.guarantee || (conc_ && std::isinf(q_))) return std::max(floor_, c.guarantee) * discount;
    if (xi_bar_) return c.guarantee * partial_power_expectation(law_, 1.0, 0.0, *xi_bar_) + floor_ * partial_power_expectation(law_, 1.0, *xi_bar_, kInf);
    return floor_ * discount;
}

double pointwise_argmax(const Regime& regime, double lambda, double xi) {
    return regime.pointwise_argmax(lambda, xi);
}

double lambda2(const Regime& regime, double lambda) {
    return regime.lambda2(lambda);
}

double budget_cost(const WealthProfile& profile, const StatePriceLaw& law, ExpectationMethod method) {
    return discounted_value(profile, law, 1.0, false, method).value;
}

Solution solve(const Regime& regime, double breakpoint_scale) {
    const double x0 = regime.contract().x0;
    const double min_budget = regime.min_budget();
    if (!(x0 > min_budget)) {
        std::ostringstream os;
        os << "initial wealth " << x0 << " does not exceed the minimum cost " << min_budget << " of "
           << describe(regime.constraint());
        throw InfeasibleBudget(os.str());
    }
    const auto& law = regime.law();
    std::size_t evaluations = 0;
    auto psi = [&](double lambda) {
        ++evaluations;
        return budget_cost(regime.profile(lambda, breakpoint_scale), law);
    };

    const double lambda0 = regime.preferences().core().marginal(x0 * std::exp(regime.market().r * regime.market().horizon));
    double lo = lambda0, hi = lambda0;
    double psi_lo = psi(lo), psi_hi = psi_lo;
    for (int k = 0; psi_hi > x0; ++k) {
        if (k == 60) throw NumericalFailure("solve: could not bracket lambda from above");
        lo = hi;
        psi_lo = psi_hi;
        hi *= 4.0;
        psi_hi = psi(hi);
    }
    for (int k = 0; psi_lo < x0; ++k) {
        if (k == 60) throw NumericalFailure("solve: could not bracket lambda from below");
        hi = lo;
        psi_hi = psi_lo;
        lo /= 4.0;
        psi_lo = psi(lo);
    }

    double lambda = lo;
    if (psi_lo == x0) {
        lambda = lo;
    } else if (psi_hi == x0) {
        lambda = hi;
    } else {
        auto f = [&](double u) { return psi(std::exp(u)) - x0; };
        std::uintmax_t iters = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(f, std::log(lo), std::log(hi), psi_lo - x0, psi_hi - x0,
                                                              boost::math::tools::eps_tolerance<double>(52), iters);
        // Keep whichever end of the final bracket has the smaller residual.
        const double ra = std::abs(f(a)), rb = std::abs(f(b));
        lambda = std::exp(ra <= rb ? a : b);
    }

    WealthProfile profile = regime.profile(lambda, breakpoint_scale);
    const double residual = std::abs(budget_cost(profile, law) - x0) / x0;
    if (!(residual <= kBudgetTol)) {
        std::ostringstream os;
        os << "solve: budget residual " << residual << " above tolerance";
        throw NumericalFailure(os.str());
    }
    Solution sol{.profile = std::move(profile),
                 .lambda = lambda,
                 .lambda2 = regime.lambda2(lambda),
                 .case_class = regime.case_class(),
                 .binding = regime.binding(lambda),
                 .constraint = regime.constraint(),
                 .thresholds = regime.thresholds(lambda),
                 .xi_bar = regime.xi_bar(),
                 .market = regime.market(),
                 .diagnostics = {}};
    sol.diagnostics.budget_residual = residual;
    sol.diagnostics.default_probability = default_probability(sol.profile, law);
    sol.diagnostics.iterations = evaluations;
    return sol;
}

Solution solve(const MarketParams& market, const ContractParams& contract, const PreferenceSpec& spec,
               const ConstraintSpec& constraint) {
    return solve(Regime(market, contract, spec, constraint));
}

Regime regime_of(const Solution& solution) {
    const auto& prefs = solution.profile.preferences();
    return Regime(solution.market, prefs.contract(), prefs.spec(), solution.constraint);
}

double default_probability(const WealthProfile& profile, const StatePriceLaw& law) {
    const double lt = profile.preferences().contract().guarantee;
    const auto& segs = profile.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const bool below = segs[i] == SegmentKind::Zero || (segs[i] == SegmentKind::ConstantFloor && profile.floor() < lt);
        if (below) return i == 0 ? 1.0 : law.sf(profile.lower(i));
    }
    return 0.0;
}

double default_probability(const Solution& solution, const StatePriceLaw& law) {
    return default_probability(solution.profile, law);
}

}  // namespace pcopt
