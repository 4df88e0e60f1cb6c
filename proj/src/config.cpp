#include "pcopt/config.hpp"

#include "pcopt/errors.hpp"

#include <fstream>
#include <set>

namespace pcopt {

using nlohmann::json;

namespace {

void reject_unknown(const json& block, const std::string& where, const std::set<std::string>& allowed) {
    if (!block.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, _] : block.items())
        if (!allowed.contains(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
}

template <class T>
void read(const json& block, const char* key, T& out) {
    if (!block.contains(key)) return;
    try {
        out = block.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

template <class T>
void read(const json& block, const char* key, std::optional<T>& out) {
    if (!block.contains(key) || block.at(key).is_null()) return;
    T value{};
    read(block, key, value);
    out = value;
}

}  // namespace

ContractParams RunConfig::contract() const {
    return ContractParams::make(l0, e0, alpha, delta, g, market.horizon, guarantee);
}

ConstraintSpec RunConfig::constraint() const {
    if (constraint_type == "none") return Unconstrained{};
    if (constraint_type == "var") return VaRConstraint{beta};
    if (constraint_type == "pi") return PortfolioInsurance{floor.value_or(floor_fraction * contract().guarantee)};
    throw ConfigError("config: constraint.type must be none, var or pi");
}

void RunConfig::validate() const {
    try {
        market.validate();
        (void)contract();
        preferences.validate();
        pcopt::validate(constraint());
        if (run.profile_points < 2 || run.curve_points < 1) throw InvalidArgument("run: grid sizes too small");
        if (run.mc_paths < 10'000) throw InvalidArgument("run: mc_paths must be at least 1e4");
        if (run.sim_paths == 0 || run.sim_steps == 0) throw InvalidArgument("run: simulation sizes must be positive");
        if (!(run.t >= 0.0 && run.t < market.horizon)) throw InvalidArgument("run: t must lie in [0, T)");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig parse_config(const json& doc) {
    RunConfig cfg;
    reject_unknown(doc, "<root>", {"market", "contract", "preferences", "constraint", "run"});
    if (doc.contains("market")) {
        const auto& b = doc.at("market");
        reject_unknown(b, "market", {"mu", "r", "sigma", "T"});
        read(b, "mu", cfg.market.mu);
        read(b, "r", cfg.market.r);
        read(b, "sigma", cfg.market.sigma);
        read(b, "T", cfg.market.horizon);
    }
    if (doc.contains("contract")) {
        const auto& b = doc.at("contract");
        reject_unknown(b, "contract", {"l0", "e0", "alpha", "delta", "g", "L_T"});
        read(b, "l0", cfg.l0);
        read(b, "e0", cfg.e0);
        read(b, "alpha", cfg.alpha);
        read(b, "delta", cfg.delta);
        read(b, "g", cfg.g);
        read(b, "L_T", cfg.guarantee);
    }
    if (doc.contains("preferences")) {
        const auto& b = doc.at("preferences");
        reject_unknown(b, "preferences", {"gamma", "eta", "epsilon", "kind"});
        read(b, "gamma", cfg.preferences.gamma);
        read(b, "eta", cfg.preferences.eta);
        read(b, "epsilon", cfg.preferences.epsilon);
        std::string kind;
        read(b, "kind", kind);
        if (!kind.empty()) {
            try {
                cfg.preferences.kind = parse_contract_kind(kind);
            } catch (const InvalidArgument& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
        }
    }
    if (doc.contains("constraint")) {
        const auto& b = doc.at("constraint");
        reject_unknown(b, "constraint", {"type", "beta", "floor", "floor_fraction"});
        read(b, "type", cfg.constraint_type);
        read(b, "beta", cfg.beta);
        read(b, "floor", cfg.floor);
        read(b, "floor_fraction", cfg.floor_fraction);
    }
    if (doc.contains("run")) {
        const auto& b = doc.at("run");
        reject_unknown(b, "run", {"seed", "mc_paths", "sim_paths", "sim_steps", "profile_points", "curve_points",
                                  "oracle_points", "t", "output_dir"});
        read(b, "seed", cfg.run.seed);
        read(b, "mc_paths", cfg.run.mc_paths);
        read(b, "sim_paths", cfg.run.sim_paths);
        read(b, "sim_steps", cfg.run.sim_steps);
        read(b, "profile_points", cfg.run.profile_points);
        read(b, "curve_points", cfg.run.curve_points);
        read(b, "oracle_points", cfg.run.oracle_points);
        read(b, "t", cfg.run.t);
        read(b, "output_dir", cfg.run.output_dir);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    json doc;
    doc["market"] = {{"mu", c.market.mu}, {"r", c.market.r}, {"sigma", c.market.sigma}, {"T", c.market.horizon}};
    doc["contract"] = {{"l0", c.l0}, {"e0", c.e0}, {"delta", c.delta}, {"g", c.g}};
    if (c.alpha) doc["contract"]["alpha"] = *c.alpha;
    if (c.guarantee) doc["contract"]["L_T"] = *c.guarantee;
    doc["preferences"] = {{"gamma", c.preferences.gamma},
                          {"eta", c.preferences.eta},
                          {"epsilon", c.preferences.epsilon},
                          {"kind", std::string(to_string(c.preferences.kind))}};
    doc["constraint"] = {{"type", c.constraint_type}, {"beta", c.beta}, {"floor_fraction", c.floor_fraction}};
    if (c.floor) doc["constraint"]["floor"] = *c.floor;
    doc["run"] = {{"mc_paths", c.run.mc_paths},       {"sim_paths", c.run.sim_paths},
                  {"sim_steps", c.run.sim_steps},     {"profile_points", c.run.profile_points},
                  {"curve_points", c.run.curve_points}, {"oracle_points", c.run.oracle_points},
                  {"t", c.run.t},                     {"output_dir", c.run.output_dir}};
    if (c.run.seed) doc["run"]["seed"] = *c.run.seed;
    return doc;
}

namespace {

json opt(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::optional<double> opt_from(const json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

}  // namespace

json solution_to_json(const Solution& s) {
    const auto& prefs = s.profile.preferences();
    const auto& c = prefs.contract();
    json doc;
    doc["market"] = {{"mu", s.market.mu}, {"r", s.market.r}, {"sigma", s.market.sigma}, {"T", s.market.horizon}};
    doc["contract"] = {{"l0", c.l0}, {"e0", c.e0}, {"alpha", c.alpha}, {"delta", c.delta}, {"g", c.g}, {"L_T", c.guarantee}};
    doc["preferences"] = {{"gamma", prefs.spec().gamma},
                          {"eta", prefs.spec().eta},
                          {"epsilon", prefs.spec().epsilon},
                          {"kind", std::string(to_string(prefs.spec().kind))}};
    std::visit([&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Unconstrained>) doc["constraint"] = {{"type", "none"}};
        if constexpr (std::is_same_v<T, VaRConstraint>) doc["constraint"] = {{"type", "var"}, {"beta", v.beta}};
        if constexpr (std::is_same_v<T, PortfolioInsurance>) doc["constraint"] = {{"type", "pi"}, {"floor", v.floor}};
    }, s.constraint);
    doc["lambda"] = s.lambda;
    doc["lambda2"] = s.lambda2;
    doc["case"] = s.case_class ? json(std::string(to_string(*s.case_class))) : json(nullptr);
    doc["binding"] = s.binding;
    doc["xi_bar"] = opt(s.xi_bar);
    doc["profile"]["breakpoints"] = s.profile.breakpoints();
    doc["profile"]["floor"] = s.profile.floor();
    json segs = json::array();
    for (auto k : s.profile.segments()) segs.push_back(std::string(to_string(k)));
    doc["profile"]["segments"] = segs;
    doc["thresholds"] = {{"xi_tildeL", s.thresholds.xi_tildeL},
                         {"xi_hatL", s.thresholds.xi_hatL},
                         {"xi_U", opt(s.thresholds.xi_U)},
                         {"xi_hat_1", opt(s.thresholds.xi_hat_1)},
                         {"xi_hat_eps", opt(s.thresholds.xi_hat_eps)}};
    doc["diagnostics"] = {{"budget_residual", s.diagnostics.budget_residual},
                          {"default_probability", s.diagnostics.default_probability},
                          {"iterations", s.diagnostics.iterations}};
    return doc;
}

Solution solution_from_json(const json& doc) {
    try {
        MarketParams market{.mu = doc.at("market").at("mu").get<double>(),
                            .r = doc.at("market").at("r").get<double>(),
                            .sigma = doc.at("market").at("sigma").get<double>(),
                            .horizon = doc.at("market").at("T").get<double>()};
        const auto& jc = doc.at("contract");
        const ContractParams contract =
            ContractParams::make(jc.at("l0").get<double>(), jc.at("e0").get<double>(), jc.at("alpha").get<double>(),
                                 jc.at("delta").get<double>(), jc.at("g").get<double>(), market.horizon,
                                 jc.at("L_T").get<double>());
        const auto& jp = doc.at("preferences");
        PreferenceSpec spec{.gamma = jp.at("gamma").get<double>(),
                            .eta = jp.at("eta").get<double>(),
                            .epsilon = jp.at("epsilon").get<double>(),
                            .kind = parse_contract_kind(jp.at("kind").get<std::string>())};
        const auto& jk = doc.at("constraint");
        const auto type = jk.at("type").get<std::string>();
        ConstraintSpec constraint = Unconstrained{};
        if (type == "var") constraint = VaRConstraint{jk.at("beta").get<double>()};
        else if (type == "pi") constraint = PortfolioInsurance{jk.at("floor").get<double>()};
        else if (type != "none") throw ConfigError("solution: unknown constraint type");

        std::vector<SegmentKind> segs;
        for (const auto& k : doc.at("profile").at("segments")) segs.push_back(parse_segment_kind(k.get<std::string>()));
        const double lambda = doc.at("lambda").get<double>();
        WealthProfile profile(Preferences(spec, contract), lambda,
                              doc.at("profile").at("breakpoints").get<std::vector<double>>(), std::move(segs),
                              doc.at("profile").at("floor").get<double>());
        std::optional<CaseClass> case_class;
        if (!doc.at("case").is_null()) {
            const auto label = doc.at("case").get<std::string>();
            for (auto c : {CaseClass::FourRegion, CaseClass::ThreeRegion, CaseClass::TwoRegion})
                if (to_string(c) == label) case_class = c;
            if (!case_class) throw ConfigError("solution: unknown case label");
        }
        const auto& jt = doc.at("thresholds");
        Thresholds t{.xi_tildeL = jt.at("xi_tildeL").get<double>(),
                     .xi_hatL = jt.at("xi_hatL").get<double>(),
                     .xi_U = opt_from(jt.at("xi_U")),
                     .xi_hat_1 = opt_from(jt.at("xi_hat_1")),
                     .xi_hat_eps = opt_from(jt.at("xi_hat_eps"))};
        const auto& jd = doc.at("diagnostics");
        return Solution{.profile = std::move(profile),
                        .lambda = lambda,
                        .lambda2 = doc.at("lambda2").get<double>(),
                        .case_class = case_class,
                        .binding = doc.at("binding").get<bool>(),
                        .constraint = constraint,
                        .thresholds = t,
                        .xi_bar = opt_from(doc.at("xi_bar")),
                        .market = market,
                        .diagnostics = {.budget_residual = jd.at("budget_residual").get<double>(),
                                        .default_probability = jd.at("default_probability").get<double>(),
                                        .iterations = jd.at("iterations").get<std::size_t>()}};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("solution: malformed document: ") + e.what());
    }
}

}  // namespace pcopt
