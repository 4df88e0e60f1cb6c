#include "pcopt/verify.hpp"

#include "pcopt/errors.hpp"
#include "pcopt/normal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pcopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kGridPoints = 20001;

double s_shaped(const CrraUtility& u, double eta, double v) {
    return v >= 0.0 ? u.value(v) : -eta * u.value(-v);
}

}  // namespace

double payoff_utility(const Preferences& prefs, double x) {
    const auto& c = prefs.contract();
    const auto& u = prefs.core();
    const double eps = prefs.epsilon();
    const double eta = prefs.spec().eta;
    double total = 0.0;
    if (eps < 1.0) total += (1.0 - eps) * s_shaped(u, eta, payoff_equity(c, prefs.spec().kind, x));
    if (eps > 0.0) total += eps * s_shaped(u, eta, x - c.guarantee);
    return total;
}

double lagrangian(const Regime& regime, double lambda, double xi, double x) {
    if (x < regime.floor()) return -kInf;
    double value = payoff_utility(regime.preferences(), x) - lambda * xi * x;
    if (regime.xi_bar() && x < regime.contract().guarantee) value -= regime.lambda2(lambda);
    return value;
}

double brute_force_argmax(const Regime& regime, double lambda, double xi) {
    const auto& prefs = regime.preferences();
    const auto& c = prefs.contract();
    const double y = lambda * xi;
    const double h_cap = (1.0 - c.tilde_delta) * prefs.core().marginal(c.gap);
    const double x_max = 10.0 * std::max(c.bonus_threshold, prefs.h_map(std::min(1e-3 * y, h_cap)));

    std::vector<double> points{0.0, regime.floor(), c.guarantee, c.bonus_threshold,
                               c.guarantee + prefs.core().inverse_marginal(y)};
    if (y < prefs.eps_marginal_cap()) points.push_back(prefs.inv_marginal_eps(y));
    if (y <= h_cap) points.push_back(prefs.h_map(y));
    const double log_lo = std::log(x_max) - 12.0 * std::log(10.0);
    const double log_hi = std::log(x_max);
    for (std::size_t i = 0; i < kGridPoints; ++i)
        points.push_back(std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / (kGridPoints - 1)));

    double best_x = regime.floor();
    double best = -kInf;
    for (double x : points) {
        const double v = lagrangian(regime, lambda, xi, x);
        if (v > best || (v == best && x > best_x)) {
            best = v;
            best_x = x;
        }
    }
    if (best_x >= x_max) throw NumericalFailure("brute_force_argmax: maximum on the top grid point");
    return best_x;
}

double lagrangian_gap(const Regime& regime, double lambda, double xi) {
    const double xc = regime.pointwise_argmax(lambda, xi);
    const double xb = brute_force_argmax(regime, lambda, xi);
    const double vc = lagrangian(regime, lambda, xi, xc);
    const double vb = lagrangian(regime, lambda, xi, xb);
    if (vb == -kInf) return 0.0;
    if (vc == -kInf) return kInf;
    const auto& prefs = regime.preferences();
    const double scale = 1.0 + std::max(std::abs(payoff_utility(prefs, xc)) + lambda * xi * xc + regime.lambda2(lambda),
                                        std::abs(payoff_utility(prefs, xb)) + lambda * xi * xb);
    return (vb - vc) / scale;
}

ScenarioSet::ScenarioSet(const StatePriceLaw& law, std::size_t n, std::uint64_t seed)
    : xi_(sample_xi(law, n + (n % 2), seed, true)) {}

namespace {

McEstimate pair_mean(const std::vector<double>& values) {
    const std::size_t pairs = values.size() / 2;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double a = 0.5 * (values[2 * k] + values[2 * k + 1]);
        const double d = a - mean;
        mean += d / static_cast<double>(k + 1);
        m2 += d * (a - mean);
    }
    const double var = pairs > 1 ? m2 / static_cast<double>(pairs - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(pairs))};
}

}  // namespace

McEstimate ScenarioSet::mean(const std::function<double(double)>& f) const {
    std::vector<double> v(xi_.size());
    std::transform(xi_.begin(), xi_.end(), v.begin(), f);
    return pair_mean(v);
}

McEstimate ScenarioSet::difference(const std::function<double(double)>& f,
                                   const std::function<double(double)>& g) const {
    std::vector<double> v(xi_.size());
    std::transform(xi_.begin(), xi_.end(), v.begin(), [&](double x) { return f(x) - g(x); });
    return pair_mean(v);
}

UtilityEstimate mc_expected_utility(const std::function<double(double)>& payoff, const Preferences& prefs,
                                    const ScenarioSet& scenarios) {
    const auto& xi = scenarios.xi();
    std::vector<double> u(xi.size()), b(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const double x = payoff(xi[i]);
        u[i] = payoff_utility(prefs, x);
        b[i] = xi[i] * x;
    }
    return {pair_mean(u), pair_mean(b)};
}

UtilityEstimate mc_expected_utility(const Solution& solution, std::size_t n, std::uint64_t seed) {
    if (n < 10'000) throw InvalidArgument("mc_expected_utility: need at least 1e4 samples");
    const ScenarioSet scenarios(state_price_law(solution.market, solution.market.horizon), n, seed);
    const auto& profile = solution.profile;
    return mc_expected_utility([&](double xi) { return profile(xi); }, profile.preferences(), scenarios);
}

double expected_utility_quadrature(const WealthProfile& profile, const StatePriceLaw& law) {
    const auto& prefs = profile.preferences();
    const double m = law.log_mean;
    const double s = law.log_sd;
    const double gamma = prefs.core().gamma();
    const double centre = -(1.0 - gamma) / gamma * s;
    const double z_min = std::min(0.0, centre) - 14.0;
    const double z_max = std::max(0.0, centre) + 14.0;
    using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    double total = 0.0;
    for (std::size_t i = 0; i < profile.segments().size(); ++i) {
        const double lo = profile.lower(i), hi = profile.upper(i);
        const double z_lo = std::max(z_min, lo > 0.0 ? (std::log(lo) - m) / s : -kInf);
        const double z_hi = std::min(z_max, std::isfinite(hi) ? (std::log(hi) - m) / s : kInf);
        if (!(z_lo < z_hi)) continue;
        auto f = [&](double z) { return payoff_utility(prefs, profile.segment_value(i, std::exp(m + s * z))) * norm_pdf(z); };
        total += Rule::integrate(f, z_lo, z_hi, 20, 1e-12);
    }
    return total;
}

std::optional<double> dominance_xi_star(const WealthProfile& a, const WealthProfile& b, const std::vector<double>& grid) {
    std::optional<double> star;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        if (a(*it) < b(*it)) break;
        star = *it;
    }
    return star;
}

std::vector<double> xi_grid(const StatePriceLaw& law, std::size_t points, double tail) {
    if (points < 2) throw InvalidArgument("xi_grid: need at least two points");
    const double lo = std::log(quantile_upper(law, 1.0 - tail));
    const double hi = std::log(quantile_upper(law, tail));
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    return grid;
}

bool OracleReport::passed() const {
    return std::all_of(gates.begin(), gates.end(), [](const GateResult& g) { return g.passed; });
}

std::optional<std::string> OracleReport::first_failure() const {
    for (const auto& g : gates)
        if (!g.passed) return g.name;
    return std::nullopt;
}

namespace {

// lambda with budget cost of family(lambda) equal to x0.
double lambda_for_budget(const std::function<WealthProfile(double)>& family, const StatePriceLaw& law, double x0,
                         double guess) {
    auto f = [&](double u) { return budget_cost(family(std::exp(u)), law) - x0; };
    double lo = std::log(guess), hi = lo;
    double flo = f(lo), fhi = flo;
    for (int k = 0; fhi > 0.0; ++k) {
        if (k == 60) throw NumericalFailure("competitor: no budget bracket");
        lo = hi;
        flo = fhi;
        hi += std::log(4.0);
        fhi = f(hi);
    }
    for (int k = 0; flo < 0.0; ++k) {
        if (k == 60) throw NumericalFailure("competitor: no budget bracket");
        hi = lo;
        fhi = flo;
        lo -= std::log(4.0);
        flo = f(lo);
    }
    if (flo == 0.0) return std::exp(lo);
    if (fhi == 0.0) return std::exp(hi);
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                          boost::math::tools::eps_tolerance<double>(52), iters);
    return std::exp(std::abs(f(a)) <= std::abs(f(b)) ? a : b);
}

// Profiles are non-increasing, so the infimum is the limit of the last segment.
double infimum(const WealthProfile& p) {
    return p.segment_value(p.segments().size() - 1, std::numeric_limits<double>::max());
}

}  // namespace

std::vector<CompetitorResult> competitor_suite(const Solution& solution, const ScenarioSet& scenarios) {
    const Regime regime = regime_of(solution);
    const auto& prefs = regime.preferences();
    const auto& c = prefs.contract();
    const auto& law = regime.law();
    const auto& market = regime.market();
    const double x0 = c.x0;
    const double lt = c.guarantee;
    const double discount = std::exp(-market.r * market.horizon);
    const auto& xi = scenarios.xi();
    const double gamma = prefs.core().gamma();

    std::vector<double> optimum(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) optimum[i] = payoff_utility(prefs, solution.profile(xi[i]));

    const auto* var = std::get_if<VaRConstraint>(&solution.constraint);
    const auto* pi = std::get_if<PortfolioInsurance>(&solution.constraint);
    const double floor = pi ? pi->floor : 0.0;

    std::vector<CompetitorResult> out;
    // The paired difference uses lambda xi (X* - Y) as a control variate; its mean is known from the
    // analytic costs, so the estimate stays unbiased.
    const double lambda = solution.lambda;
    const double optimum_cost = budget_cost(solution.profile, law);
    std::vector<double> optimum_wealth(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) optimum_wealth[i] = solution.profile(xi[i]);

    // cost: E[xi Y]; default_prob: P(Y < L_T); min_wealth: inf Y. All analytic.
    auto add = [&](std::string name, const std::function<double(double)>& payoff, double cost, double default_prob,
                   double min_wealth) {
        CompetitorResult r;
        r.name = std::move(name);
        r.feasible = true;
        if (var && default_prob > var->beta + 1e-12) {
            r.feasible = false;
            r.note = "violates the VaR limit";
        }
        if (pi && min_wealth < floor) {
            r.feasible = false;
            r.note = "falls below the floor";
        }
        std::vector<double> u(xi.size()), d(xi.size());
        for (std::size_t i = 0; i < xi.size(); ++i) {
            const double y = payoff(xi[i]);
            u[i] = payoff_utility(prefs, y);
            d[i] = optimum[i] - u[i] - lambda * xi[i] * (optimum_wealth[i] - y);
        }
        r.utility = pair_mean(u);
        r.advantage = pair_mean(d);
        r.advantage.mean += lambda * (optimum_cost - cost);
        out.push_back(std::move(r));
    };

    const double bond = x0 / discount;
    add("bond", [&](double) { return bond; }, x0, bond < lt ? 1.0 : 0.0, bond);

    const double lambda_m = std::pow(partial_power_expectation(law, 1.0 - 1.0 / gamma, 0.0, kInf) / x0, gamma);
    add("merton", [&](double z) { return prefs.core().inverse_marginal(lambda_m * z); }, x0,
        law.sf(prefs.core().marginal(lt) / lambda_m), 0.0);

    const double cppi_floor = std::max(lt, floor);
    if (x0 > cppi_floor * discount) {
        constexpr double multiplier = 3.0;
        const double p = -multiplier * market.sigma / market.theta();
        const double k = (x0 - cppi_floor * discount) / partial_power_expectation(law, 1.0 + p, 0.0, kInf);
        add("cppi", [&, p, k](double z) { return cppi_floor + k * std::pow(z, p); }, x0, 0.0, cppi_floor);
    }

    if (var || pi) {
        const Regime unc(market, c, prefs.spec(), Unconstrained{});
        const Regime pi_regime(market, c, prefs.spec(), PortfolioInsurance{floor});
        auto family = [&](double lambda) {
            const Thresholds t = unc.thresholds(lambda);
            double cut = unc.floor_start(lambda);
            double tail_floor = floor;
            double tail_end = kInf;
            if (var) {
                tail_floor = lt;
                tail_end = std::max(cut, *regime.xi_bar());
            } else if (floor >= lt) {
                cut = std::min(cut, pi_regime.floor_start(lambda));
            }
            std::vector<std::pair<SegmentKind, double>> pieces{{SegmentKind::InvMarginalEps, std::min(t.xi_tildeL, cut)},
                                                               {SegmentKind::ConstantTildeL, std::min(t.xi_hatL, cut)},
                                                               {SegmentKind::GuaranteePlusInv, cut},
                                                               {SegmentKind::ConstantFloor, tail_end}};
            if (std::isfinite(tail_end)) pieces.push_back({SegmentKind::Zero, kInf});
            return WealthProfile::build(prefs, lambda, tail_floor, pieces);
        };
        const WealthProfile projected = family(lambda_for_budget(family, law, x0, solution.lambda));
        add("projected_unconstrained", [&](double z) { return projected(z); }, budget_cost(projected, law),
            default_probability(projected, law),
            infimum(projected));
    }

    for (double scale : {0.95, 1.05}) {
        std::ostringstream name;
        name << "perturbed_x" << scale;
        const Solution moved = solve(regime, scale);
        add(name.str(), [&](double z) { return moved.profile(z); }, budget_cost(moved.profile, law),
            default_probability(moved.profile, law),
            infimum(moved.profile));
    }
    return out;
}

OracleReport run_verification(const Solution& solution, const VerifyOptions& options) {
    const Regime regime = regime_of(solution);
    const auto& prefs = regime.preferences();
    const auto& law = regime.law();
    const double x0 = prefs.contract().x0;
    OracleReport report;

    NormalStream rng(options.seed, 0xB0B0'0000'0000ULL);
    double worst = -kInf;
    for (std::size_t k = 0; k < options.oracle_points; ++k) {
        const double lambda = solution.lambda * std::pow(10.0, -2.0 + 4.0 * rng.uniform());
        const double z = -4.0 + 8.0 * rng.uniform();
        const double xi = std::exp(law.log_mean + law.log_sd * z);
        worst = std::max(worst, lagrangian_gap(regime, lambda, xi));
    }
    report.max_lagrangian_gap = worst;
    report.oracle_points = options.oracle_points;
    {
        std::ostringstream os;
        os << "max relative gap " << worst << " over " << options.oracle_points << " points";
        report.gates.push_back({"lagrangian_oracle", worst <= 1e-8, os.str()});
    }

    const ScenarioSet scenarios(law, options.mc_paths, options.seed);
    const auto est = mc_expected_utility([&](double z) { return solution.profile(z); }, prefs, scenarios);
    report.budget_mc = est.budget;
    report.utility_mc = est.utility;
    report.utility_quadrature = expected_utility_quadrature(solution.profile, law);
    {
        std::ostringstream os;
        os << "E[xi X] = " << est.budget.mean << " +- " << est.budget.std_error << " vs " << x0;
        report.gates.push_back({"budget_mc", std::abs(est.budget.mean - x0) <= 4.0 * est.budget.std_error, os.str()});
    }
    {
        std::ostringstream os;
        os << "MC " << est.utility.mean << " +- " << est.utility.std_error << " vs quadrature "
           << report.utility_quadrature;
        report.gates.push_back({"utility_quadrature",
                                std::abs(est.utility.mean - report.utility_quadrature) <= 4.0 * est.utility.std_error,
                                os.str()});
    }
    if (const auto* var = std::get_if<VaRConstraint>(&solution.constraint)) {
        const double p = default_probability(solution, law);
        std::ostringstream os;
        os << "P(X < L_T) = " << p << " vs beta " << var->beta;
        report.gates.push_back({"var_compliance", p <= var->beta + 1e-12, os.str()});
        const Solution unc = solve(Regime(solution.market, prefs.contract(), prefs.spec(), Unconstrained{}));
        report.dominance_xi_star = dominance_xi_star(solution.profile, unc.profile, xi_grid(law, 2001));
    }

    report.competitors = competitor_suite(solution, scenarios);
    {
        std::ostringstream os;
        bool ok = true;
        for (const auto& comp : report.competitors) {
            if (!comp.feasible) continue;
            if (comp.advantage.mean < -options.competitor_sigmas * comp.advantage.std_error) {
                ok = false;
                os << comp.name << " beats the solution by " << -comp.advantage.mean << " (se "
                   << comp.advantage.std_error << "); ";
            }
        }
        if (ok) os << "no feasible competitor beats the solution";
        report.gates.push_back({"competitors", ok, os.str()});
    }
    return report;
}

}  // namespace pcopt
