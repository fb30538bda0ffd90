#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mccall/dist.hpp"
#include "mccall/model.hpp"
#include "mccall/oracle.hpp"

namespace mccall {

struct GridConfig {
    std::size_t n_z = 201;
    std::size_t n_w = 2001;
};

// Pass/fail thresholds for verification. The first three are the documented
// config keys; the rest default to the documented acceptance bounds.
struct Tolerances {
    double root = 1e-12;
    double quad = 1e-10;
    double equiv = 1e-6;          // relative welfare gap between the two economies
    double reservation = 1e-8;    // max |w_ui - w_wi|
    double effort = 1e-6;         // max |lambda_ui - lambda_wi|
    double budget = 1e-9;         // |budget residual|
    double surplus = 1e-6;        // surplus-match audit
    double derivative = 1e-4;     // analytic vs finite-difference slopes, relative
    double pooling = 1e-10;       // |w_res - x0| on the pooling region
    double concise = 1e-8;        // direct vs concise welfare, relative
};

struct SweepSpec {
    std::string path;  // dotted, e.g. "policy.phi"
    std::vector<double> values;
};

struct ScenarioConfig {
    Primitives prim;
    WIPolicy policy;
    bool balance_tax = false;
    DistributionParams offer;
    DistributionParams prior;
    GridConfig grid;
    Tolerances tol;
    std::optional<oracle::SimConfig> sim;
    std::string output_dir = "out";
    std::optional<SweepSpec> sweep;
    nlohmann::json document;  // the parsed input, kept for sweeps

    Distribution offer_dist() const { return Distribution(offer); }
    Distribution prior_dist() const { return Distribution(prior); }
    SolverOptions solver_options() const { return {tol.root, tol.quad, 200}; }
};

// Parses and validates a scenario document. Throws ConfigError naming the
// offending key on any schema violation, including unknown keys.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Copy of `cfg` with the numeric value at dotted `path` replaced, re-validated.
ScenarioConfig with_value(const ScenarioConfig& cfg, const std::string& path, double value);

nlohmann::json to_json(const DistributionParams& p);

}  // namespace mccall
