#include "mccall/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mccall/errors.hpp"

namespace mccall {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + where + k + "'");
}

const json& object_at(const json& doc, const char* key, const std::string& where) {
    const auto& v = doc.at(key);
    if (!v.is_object()) throw ConfigError("'" + where + key + "' must be an object");
    return v;
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("'" + where + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + where + key + "' must be finite");
    return x;
}

double required_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + where + key + "'");
    return number(obj, key, where, 0.0);
}

std::size_t count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("'" + where + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

Primitives parse_primitives(const json& j) {
    const std::string w = "primitives.";
    reject_unknown(j, w, {"r", "mode", "lambda_bar", "kappa", "eta"});
    Primitives p;
    if (!j.contains("mode") || !j.at("mode").is_string())
        throw ConfigError("'primitives.mode' must be \"exogenous\" or \"endogenous\"");
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "exogenous")
        p.mode = SearchMode::ExogenousArrival;
    else if (mode == "endogenous")
        p.mode = SearchMode::EndogenousSearch;
    else
        throw ConfigError("'primitives.mode' must be \"exogenous\" or \"endogenous\", got \"" + mode + "\"");
    p.r = number(j, "r", w, p.r);
    p.lambda_bar = number(j, "lambda_bar", w, 0.0);
    p.kappa = number(j, "kappa", w, p.kappa);
    p.eta = number(j, "eta", w, p.eta);
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("primitives: ") + e.what());
    }
    return p;
}

BenefitSchedule parse_benefit(const json& j) {
    if (j.is_number()) {
        if (!std::isfinite(j.get<double>())) throw ConfigError("'policy.b' must be finite");
        return BenefitSchedule::constant(j.get<double>());
    }
    if (!j.is_object()) throw ConfigError("'policy.b' must be a number or an object");
    const std::string w = "policy.b.";
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("'policy.b.kind' must be one of constant, affine, table");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        reject_unknown(j, w, {"kind", "value"});
        return BenefitSchedule::constant(required_number(j, "value", w));
    }
    if (kind == "affine") {
        reject_unknown(j, w, {"kind", "a0", "a1"});
        return BenefitSchedule::affine(required_number(j, "a0", w), required_number(j, "a1", w));
    }
    if (kind == "table") {
        reject_unknown(j, w, {"kind", "z", "b"});
        if (!j.contains("z") || !j.contains("b") || !j.at("z").is_array() || !j.at("b").is_array())
            throw ConfigError("'policy.b' table needs arrays 'z' and 'b'");
        auto z = j.at("z").get<std::vector<double>>();
        auto b = j.at("b").get<std::vector<double>>();
        if (z.size() != b.size() || z.size() < 2)
            throw ConfigError("'policy.b' table arrays must have equal length of at least 2");
        return BenefitSchedule::table(std::move(z), std::move(b));
    }
    throw ConfigError("'policy.b.kind' must be one of constant, affine, table; got \"" + kind + "\"");
}

DistributionParams parse_dist(const json& j, const std::string& name) {
    const std::string w = name + ".";
    reject_unknown(j, w, {"family", "lo", "hi", "mu", "sigma", "alpha", "beta"});
    DistributionParams p;
    if (!j.contains("family") || !j.at("family").is_string())
        throw ConfigError("'" + w + "family' must be uniform, truncated_lognormal or scaled_beta");
    const auto fam = j.at("family").get<std::string>();
    if (fam == "uniform")
        p.family = Family::Uniform;
    else if (fam == "truncated_lognormal")
        p.family = Family::TruncatedLogNormal;
    else if (fam == "scaled_beta")
        p.family = Family::ScaledBeta;
    else
        throw ConfigError("'" + w + "family' must be uniform, truncated_lognormal or scaled_beta");
    p.lo = required_number(j, "lo", w);
    p.hi = required_number(j, "hi", w);
    if (p.family == Family::TruncatedLogNormal) {
        p.mu = required_number(j, "mu", w);
        p.sigma = required_number(j, "sigma", w);
    }
    if (p.family == Family::ScaledBeta) {
        p.alpha = required_number(j, "alpha", w);
        p.beta = required_number(j, "beta", w);
    }
    try {
        Distribution check(p);
    } catch (const ConfigError& e) {
        throw ConfigError(name + ": " + e.what());
    }
    return p;
}

void positive(double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string("'") + key + "' must be positive");
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, "", {"primitives", "policy", "offer_dist", "prior_dist", "grid", "tolerances",
                             "sim", "output_dir", "sweep"});
    for (const char* k : {"primitives", "policy", "offer_dist", "prior_dist"})
        if (!doc.contains(k)) throw ConfigError(std::string("missing key '") + k + "'");

    ScenarioConfig cfg;
    cfg.document = doc;
    cfg.prim = parse_primitives(object_at(doc, "primitives", ""));

    const auto& pol = object_at(doc, "policy", "");
    reject_unknown(pol, "policy.", {"b", "T", "phi", "balance_tax"});
    if (pol.contains("b")) cfg.policy.b = parse_benefit(pol.at("b"));
    cfg.policy.T = number(pol, "T", "policy.", 0.0);
    cfg.policy.phi = number(pol, "phi", "policy.", 0.0);
    if (pol.contains("balance_tax")) {
        if (!pol.at("balance_tax").is_boolean()) throw ConfigError("'policy.balance_tax' must be a boolean");
        cfg.balance_tax = pol.at("balance_tax").get<bool>();
    }
    cfg.policy.validate(cfg.prim);

    cfg.offer = parse_dist(object_at(doc, "offer_dist", ""), "offer_dist");
    cfg.prior = parse_dist(object_at(doc, "prior_dist", ""), "prior_dist");

    if (doc.contains("grid")) {
        const auto& g = object_at(doc, "grid", "");
        reject_unknown(g, "grid.", {"n_z", "n_w"});
        cfg.grid.n_z = count(g, "n_z", "grid.", cfg.grid.n_z);
        cfg.grid.n_w = count(g, "n_w", "grid.", cfg.grid.n_w);
    }
    if (cfg.grid.n_z < 51) throw ConfigError("'grid.n_z' must be at least 51");
    if (cfg.grid.n_w < 2) throw ConfigError("'grid.n_w' must be at least 2");

    if (doc.contains("tolerances")) {
        const auto& t = object_at(doc, "tolerances", "");
        const std::string w = "tolerances.";
        reject_unknown(t, w, {"root", "quad", "equiv", "reservation", "effort", "budget", "surplus",
                              "derivative", "pooling", "concise"});
        auto& tol = cfg.tol;
        tol.root = number(t, "root", w, tol.root);
        tol.quad = number(t, "quad", w, tol.quad);
        tol.equiv = number(t, "equiv", w, tol.equiv);
        tol.reservation = number(t, "reservation", w, tol.reservation);
        tol.effort = number(t, "effort", w, tol.effort);
        tol.budget = number(t, "budget", w, tol.budget);
        tol.surplus = number(t, "surplus", w, tol.surplus);
        tol.derivative = number(t, "derivative", w, tol.derivative);
        tol.pooling = number(t, "pooling", w, tol.pooling);
        tol.concise = number(t, "concise", w, tol.concise);
        for (auto [v, k] : {std::pair{tol.root, "tolerances.root"}, {tol.quad, "tolerances.quad"},
                            {tol.equiv, "tolerances.equiv"}, {tol.reservation, "tolerances.reservation"},
                            {tol.effort, "tolerances.effort"}, {tol.budget, "tolerances.budget"},
                            {tol.surplus, "tolerances.surplus"}, {tol.derivative, "tolerances.derivative"},
                            {tol.pooling, "tolerances.pooling"}, {tol.concise, "tolerances.concise"}})
            positive(v, k);
    }

    if (doc.contains("sim")) {
        const auto& s = object_at(doc, "sim", "");
        const std::string w = "sim.";
        reject_unknown(s, w, {"n_agents", "dt", "horizon", "seed", "antithetic"});
        oracle::SimConfig sim;
        sim.n_agents = count(s, "n_agents", w, sim.n_agents);
        sim.dt = number(s, "dt", w, sim.dt);
        sim.horizon = number(s, "horizon", w, sim.horizon);
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned()) throw ConfigError("'sim.seed' must be an unsigned integer");
            sim.seed = s.at("seed").get<std::uint64_t>();
        }
        if (s.contains("antithetic")) {
            if (!s.at("antithetic").is_boolean()) throw ConfigError("'sim.antithetic' must be a boolean");
            sim.antithetic = s.at("antithetic").get<bool>();
        }
        sim.validate(cfg.prim);
        cfg.sim = sim;
    }

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigError("'output_dir' must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }

    if (doc.contains("sweep")) {
        const auto& s = object_at(doc, "sweep", "");
        reject_unknown(s, "sweep.", {"path", "values"});
        if (!s.contains("path") || !s.at("path").is_string())
            throw ConfigError("'sweep.path' must be a dotted key path string");
        if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty())
            throw ConfigError("'sweep.values' must be a non-empty array of numbers");
        SweepSpec sw;
        sw.path = s.at("path").get<std::string>();
        for (const auto& v : s.at("values")) {
            if (!v.is_number()) throw ConfigError("'sweep.values' must contain numbers only");
            sw.values.push_back(v.get<double>());
        }
        // Fail now rather than on the first sweep point.
        with_value(cfg, sw.path, sw.values.front());
        cfg.sweep = std::move(sw);
    }
    return cfg;
}

ScenarioConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

ScenarioConfig with_value(const ScenarioConfig& cfg, const std::string& path, double value) {
    json doc = cfg.document;
    doc.erase("sweep");
    json* node = &doc;
    std::stringstream parts(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(parts, key, '.')) keys.push_back(key);
    if (keys.empty()) throw ConfigError("sweep path is empty");
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        if (!node->contains(keys[i]) || !(*node)[keys[i]].is_object())
            throw ConfigError("sweep path '" + path + "' does not name a config object");
        node = &(*node)[keys[i]];
    }
    if (node->contains(keys.back()) && !(*node)[keys.back()].is_number())
        throw ConfigError("sweep path '" + path + "' does not name a numeric key");
    (*node)[keys.back()] = value;
    auto out = parse_config(doc);
    out.document = cfg.document;
    return out;
}

json to_json(const DistributionParams& p) {
    json j{{"family", to_string(p.family)}, {"lo", p.lo}, {"hi", p.hi}};
    if (p.family == Family::TruncatedLogNormal) {
        j["mu"] = p.mu;
        j["sigma"] = p.sigma;
    }
    if (p.family == Family::ScaledBeta) {
        j["alpha"] = p.alpha;
        j["beta"] = p.beta;
    }
    return j;
}

}  // namespace mccall
