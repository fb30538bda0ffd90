#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mccall/config.hpp"
#include "mccall/errors.hpp"
#include "mccall/pipeline.hpp"

namespace {

int report(const std::string& kind, const std::string& message, std::optional<double> z, int code) {
    nlohmann::json err{{"error", kind}, {"message", message}, {"z", z ? nlohmann::json(*z) : nullptr}};
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"McCall search with wage insurance and its UI-only replicas"};
    app.require_subcommand(1, 1);

    std::string config_path;
    mccall::RunOptions opt;
    std::string out_dir;
    std::uint64_t seed = 0;

    const char* commands[][2] = {
        {"solve", "solve the WI economy on the z grid"},
        {"replicate", "construct the UI-only policy"},
        {"verify", "re-solve the UI economy and compare"},
        {"lemma-check", "pooling and monotonicity checks (endogenous search)"},
        {"sweep", "run verify over the values in the config's sweep block"},
        {"simulate", "Monte Carlo panel of both economies"},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", config_path, "scenario JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        if (std::string(c[0]) == "simulate") {
            sub->add_option("--seed", seed, "RNG seed (overrides sim.seed)");
            sub->add_flag("--trace", opt.trace, "write per-agent sim_trace.csv");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mccall::kExitConfig;
    }

    const auto* sub = app.get_subcommands().front();
    if (sub->count("--out")) opt.out_dir = out_dir;
    if (sub->get_option_no_throw("--seed") && sub->count("--seed")) opt.seed = seed;

    try {
        const auto cfg = mccall::load_config(config_path);
        return mccall::run_command(sub->get_name(), cfg, opt);
    } catch (const mccall::ConfigError& e) {
        return report("ConfigError", e.what(), std::nullopt, mccall::kExitConfig);
    } catch (const mccall::SolverError& e) {
        return report(e.kind(), e.what(), e.z(), mccall::kExitSolver);
    }
}
