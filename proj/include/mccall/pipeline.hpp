#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mccall/config.hpp"
#include "mccall/model.hpp"
#include "mccall/oracle.hpp"
#include "mccall/replicate.hpp"
#include "mccall/welfare.hpp"

namespace mccall {

struct Check {
    std::string name;
    double value;
    double tol;
    bool pass;
};

// Solved WI economy, its UI-only replica, and the replica re-solved from scratch.
struct ScenarioRun {
    WIPolicy policy;  // with the balancing tax filled in when requested
    WISolution sol;
    UIOnlyPolicy ui;
    VerificationReport ver;
    WelfareReport wi_report;
    WelfareReport ui_report;
    std::optional<SurplusAudit> audit;  // endogenous search only
};

WIPolicy effective_policy(const ScenarioConfig& cfg);
WISolution solve_scenario(const ScenarioConfig& cfg, const WIPolicy& policy);
ScenarioRun run_scenario(const ScenarioConfig& cfg);

struct LemmaRow {
    double z;
    double w_res;
    double surplus;
    double effort;
    double dw_analytic;
    double dw_fd;
    double ds_analytic;
    double ds_fd;
    bool pooling;  // z <= x0, or phi = 0
    bool central;  // false when the stencil would cross x0 and a one-sided difference was used
};

struct LemmaReport {
    double x0;
    std::vector<LemmaRow> rows;
    double max_pooling_dev = 0.0;   // max |w_res - x0| over z <= x0
    bool strict_signs = true;       // dw < 0 and dS > 0 at every z > x0
    bool below_z = true;            // w_res < z at every z > x0
    double max_fd_rel = 0.0;        // over rows with central differences
    std::size_t active_points = 0;
};

// Pooling and monotonicity on the solved grid, with finite differences of
// re-solved reservation wages: Richardson-extrapolated central differences
// with outer step 1e-4 z, one-sided when the stencil would cross x0.
LemmaReport lemma_check(const ScenarioConfig& cfg, const WIPolicy& policy, const WISolution& sol);

std::vector<Check> verification_checks(const ScenarioConfig& cfg, const ScenarioRun& run,
                                       const LemmaReport* lemma);

nlohmann::json to_json(const WISolution& sol, const WIPolicy& policy);
nlohmann::json to_json(const UIOnlyPolicy& ui);
nlohmann::json to_json(const WelfareReport& rep);
nlohmann::json to_json(const oracle::SimReport& rep);
nlohmann::json to_json(const std::vector<Check>& checks);

struct RunOptions {
    std::optional<std::string> out_dir;  // overrides the config's output_dir
    std::optional<std::uint64_t> seed;   // overrides sim.seed
    bool trace = false;                  // per-agent CSV from `simulate`
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitVerification = 4;

// Runs one of solve, replicate, verify, lemma-check, sweep, simulate and
// writes its artifacts. Returns kExitOk or kExitVerification; errors throw.
int run_command(const std::string& command, const ScenarioConfig& cfg, const RunOptions& opt);

}  // namespace mccall
