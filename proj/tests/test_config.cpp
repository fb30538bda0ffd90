#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mccall/config.hpp"
#include "mccall/errors.hpp"
#include "mccall/pipeline.hpp"

using namespace mccall;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "primitives": {"mode": "exogenous", "r": 0.05, "lambda_bar": 0.8},
  "policy": {"phi": 0.3},
  "offer_dist": {"family": "truncated_lognormal", "mu": 0.0, "sigma": 0.5, "lo": 0.2, "hi": 5.0},
  "prior_dist": {"family": "uniform", "lo": 0.5, "hi": 3.0}
})";

nlohmann::json minimal() { return nlohmann::json::parse(kMinimal); }

std::string error_of(const nlohmann::json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mccall_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(MCCALL_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kConfigs = MCCALL_CONFIGS;

}  // namespace

TEST_CASE("a minimal config gets the documented defaults") {
    const auto cfg = parse_config(minimal());
    CHECK(cfg.grid.n_z == 201);
    CHECK(cfg.grid.n_w == 2001);
    CHECK(cfg.tol.root == 1e-12);
    CHECK(cfg.tol.quad == 1e-10);
    CHECK(cfg.tol.equiv == 1e-6);
    CHECK(cfg.policy.phi == 0.3);
    CHECK(cfg.policy.T == 0.0);
    CHECK_FALSE(cfg.balance_tax);
    CHECK_FALSE(cfg.sim.has_value());
}

TEST_CASE("schema violations name the key") {
    auto doc = minimal();
    doc["policy"]["phi"] = 1.0;
    CHECK(error_of(doc).find("phi must lie in [0, 0.99]") != std::string::npos);

    doc = minimal();
    doc["primitives"] = {{"mode", "endogenous"}, {"r", 0.05}};
    doc["policy"]["b"] = {{"kind", "table"}, {"z", {0.5, 3.0}}, {"b", {0.3, 0.5}}};
    CHECK(error_of(doc).find("b must be constant") != std::string::npos);

    doc = minimal();
    doc["grid"] = {{"n_z", 201}, {"nz", 5}};
    CHECK(error_of(doc).find("grid.nz") != std::string::npos);

    doc = minimal();
    doc["primitives"]["mode"] = "sometimes";
    CHECK(error_of(doc).find("primitives.mode") != std::string::npos);

    doc = minimal();
    doc.erase("offer_dist");
    CHECK(error_of(doc).find("offer_dist") != std::string::npos);

    doc = minimal();
    doc["tolerances"] = {{"equiv", -1.0}};
    CHECK_FALSE(error_of(doc).empty());

    CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
}

TEST_CASE("sweeps replace one dotted value") {
    auto doc = minimal();
    doc["sweep"] = {{"path", "policy.phi"}, {"values", {0.1, 0.2}}};
    const auto cfg = parse_config(doc);
    REQUIRE(cfg.sweep);
    CHECK(cfg.sweep->values.size() == 2);
    CHECK(with_value(cfg, "policy.phi", 0.2).policy.phi == 0.2);
    CHECK_THROWS_AS(with_value(cfg, "policy.phi", 2.0), ConfigError);
    doc["sweep"]["path"] = "policy.nothing";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("replicate writes a lump-sum policy with exogenous arrivals") {
    auto cfg = load_config(kConfigs + "/default_exogenous.json");
    RunOptions opt;
    opt.out_dir = scratch_dir("replicate").string();
    CHECK(run_command("replicate", cfg, opt) == kExitOk);
    const auto j = nlohmann::json::parse(slurp(fs::path(*opt.out_dir) / "ui_policy.json"));
    CHECK(j["policy"]["tax"]["kind"] == "lump_sum");
    CHECK_FALSE(fs::exists(fs::path(*opt.out_dir) / "q_schedule.csv"));
}

TEST_CASE("lemma-check flags the pooling region") {
    auto cfg = load_config(kConfigs + "/default_endogenous.json");
    RunOptions opt;
    opt.out_dir = scratch_dir("lemma").string();
    CHECK(run_command("lemma-check", cfg, opt) == kExitOk);
    const auto policy = effective_policy(cfg);
    const double x0 = *solve_scenario(cfg, policy).x0;
    std::istringstream in(slurp(fs::path(*opt.out_dir) / "lemma.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("z,w_res,dw_analytic,dw_fd,dS_analytic,dS_fd,region", 0) == 0);
    std::size_t pooled = 0, rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const double z = std::stod(line.substr(0, line.find(',')));
        const bool flagged = line.find(",pooling,") != std::string::npos;
        CHECK(flagged == (z <= x0));
        pooled += flagged;
    }
    CHECK(rows == cfg.grid.n_z);
    CHECK(pooled > 0);
}

TEST_CASE("verify artifacts are byte-identical across runs") {
    auto cfg = load_config(kConfigs + "/default_exogenous.json");
    RunOptions a, b;
    a.out_dir = scratch_dir("idem_a").string();
    b.out_dir = scratch_dir("idem_b").string();
    CHECK(run_command("verify", cfg, a) == kExitOk);
    CHECK(run_command("verify", cfg, b) == kExitOk);
    for (const char* f : {"verification.json", "welfare_wi.csv", "welfare_ui.csv"})
        CHECK(slurp(fs::path(*a.out_dir) / f) == slurp(fs::path(*b.out_dir) / f));
    const auto j = nlohmann::json::parse(slurp(fs::path(*a.out_dir) / "verification.json"));
    CHECK(j["pass"] == true);
}

TEST_CASE("pass/fail follows the configured tolerances") {
    auto cfg = load_config(kConfigs + "/default_exogenous.json");
    cfg.tol.equiv = 1e-18;
    RunOptions opt;
    opt.out_dir = scratch_dir("strict").string();
    const int code = run_command("verify", cfg, opt);
    const auto j = nlohmann::json::parse(slurp(fs::path(*opt.out_dir) / "verification.json"));
    bool failed = false;
    for (const auto& c : j["checks"])
        if (c["name"] == "welfare_equivalence") failed = !c["pass"].get<bool>();
    CHECK(failed == (code == kExitVerification));
}

TEST_CASE("unknown commands are config errors") {
    const auto cfg = load_config(kConfigs + "/default_exogenous.json");
    CHECK_THROWS_AS(run_command("explode", cfg, {}), ConfigError);
}

TEST_CASE("cli exit codes") {
    const auto dir = scratch_dir("cli");
    CHECK(cli("verify --config " + kConfigs + "/default_exogenous.json --out " + dir.string()) == 0);
    CHECK(cli("verify --config /nonexistent.json") == 2);
    CHECK(cli("frobnicate --config " + kConfigs + "/default_exogenous.json") == 2);

    fs::create_directories(dir);
    auto doc = minimal();
    doc["policy"]["phi"] = 1.0;
    std::ofstream(dir / "bad.json") << doc.dump();
    CHECK(cli("verify --config " + (dir / "bad.json").string()) == 2);

    // Infeasible: no lump-sum tax keeps every reservation wage inside the support.
    doc = minimal();
    doc["policy"] = {{"b", 0.4}, {"phi", 0.9}, {"balance_tax", true}};
    std::ofstream(dir / "infeasible.json") << doc.dump();
    CHECK(cli("verify --config " + (dir / "infeasible.json").string() + " --out " + dir.string()) == 3);

    doc = minimal();
    doc["policy"] = {{"b", 0.4}, {"phi", 0.5}, {"T", 0.0}};
    std::ofstream(dir / "unbalanced.json") << doc.dump();
    CHECK(cli("verify --config " + (dir / "unbalanced.json").string() + " --out " + dir.string()) == 4);
}
