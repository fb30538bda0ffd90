#include "mccall/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mccall/errors.hpp"

namespace mccall {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Check at_most(std::string name, double value, double tol) {
    return {std::move(name), value, tol, value <= tol};
}

// Passes when value is strictly positive; reported with tol 0.
Check positive_check(std::string name, double value) {
    return {std::move(name), value, 0.0, value > 0.0};
}

std::ofstream open_artifact(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    out << std::setprecision(17);
    return out;
}

void write_json(const fs::path& dir, const std::string& name, const json& j) {
    auto out = open_artifact(dir, name);
    out << j.dump(2) << '\n';
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string mode_name(SearchMode m) {
    return m == SearchMode::EndogenousSearch ? "endogenous" : "exogenous";
}

bool all_pass(const std::vector<Check>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

json scenario_summary(const ScenarioConfig& cfg, const ScenarioRun& run) {
    return {{"mode", mode_name(cfg.prim.mode)},
            {"phi", run.policy.phi},
            {"T", run.policy.T},
            {"x0", nullable(run.sol.x0)},
            {"n_z", cfg.grid.n_z}};
}

void write_per_z(const fs::path& dir, const std::string& name, const WelfareReport& rep) {
    auto out = open_artifact(dir, name);
    out << "z,alpha,w_res,benefit,expected_receipts,welfare_contrib\n";
    for (const auto& r : rep.per_z)
        out << r.z << ',' << r.alpha << ',' << r.w_res << ',' << r.benefit << ','
            << r.expected_receipts << ',' << r.welfare_contrib << '\n';
}

}  // namespace

WIPolicy effective_policy(const ScenarioConfig& cfg) {
    WIPolicy p = cfg.policy;
    if (cfg.balance_tax) {
        p.T = balance_wi_tax(p, cfg.prim, cfg.offer_dist(), cfg.prior_dist(), cfg.grid.n_z,
                             cfg.solver_options())
                  .T;
    }
    return p;
}

WISolution solve_scenario(const ScenarioConfig& cfg, const WIPolicy& policy) {
    return solve_wi(policy, cfg.prim, cfg.offer_dist(), cfg.prior_dist(), cfg.grid.n_z,
                    cfg.solver_options());
}

ScenarioRun run_scenario(const ScenarioConfig& cfg) {
    const auto F = cfg.offer_dist();
    const auto H = cfg.prior_dist();
    const auto opt = cfg.solver_options();
    ScenarioRun run;
    run.policy = effective_policy(cfg);
    run.sol = solve_scenario(cfg, run.policy);
    run.ui = cfg.prim.endogenous() ? construct_ui_endogenous(run.sol, run.policy, cfg.prim, F, H, opt)
                                   : construct_ui_exogenous(run.sol, cfg.prim, F, H);
    run.ver = verify_replication(run.ui, run.sol, cfg.prim, F, opt);
    run.wi_report = evaluate_economy(wi_economy(run.sol, run.policy), cfg.prim, F, H, opt.quad_tol);
    run.ui_report = evaluate_economy(ui_economy(run.ui, run.ver.ui_rule), cfg.prim, F, H, opt.quad_tol);
    if (const auto* s = std::get_if<ScheduleTax>(&run.ui.tax))
        run.audit = audit_surplus_match(*s->q, run.sol, cfg.prim);
    return run;
}

LemmaReport lemma_check(const ScenarioConfig& cfg, const WIPolicy& policy, const WISolution& sol) {
    if (!cfg.prim.endogenous() || !sol.x0)
        throw ConfigError("lemma-check requires primitives.mode = \"endogenous\"");
    const auto F = cfg.offer_dist();
    const auto opt = cfg.solver_options();
    const double x0 = *sol.x0;
    auto w_at = [&](double z) { return reservation_endogenous(z, policy, cfg.prim, F, x0, opt); };
    auto s_at = [&](double z, double w) { return surplus_and_effort(z, w, policy, cfg.prim, F).surplus; };

    LemmaReport rep;
    rep.x0 = x0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        LemmaRow row{};
        row.z = sol.z_grid[i];
        row.w_res = sol.w_res[i];
        row.surplus = sol.surplus[i];
        row.effort = sol.effort[i];
        // With phi = 0 insurance never binds and every type pools at x0.
        row.pooling = row.z <= x0 || policy.phi == 0.0;
        const double h = 1e-4 * std::abs(row.z);
        if (row.pooling || row.z - h > x0) {
            // Richardson combination of central differences at h and h/2.
            row.central = true;
            auto central = [&](double step, double& dw, double& ds) {
                const double zp = row.z + step, zm = row.z - step;
                const double wp = w_at(zp), wm = w_at(zm);
                dw = (wp - wm) / (2.0 * step);
                ds = (s_at(zp, wp) - s_at(zm, wm)) / (2.0 * step);
            };
            double dw1, ds1, dw2, ds2;
            central(h, dw1, ds1);
            central(0.5 * h, dw2, ds2);
            row.dw_fd = (4.0 * dw2 - dw1) / 3.0;
            row.ds_fd = (4.0 * ds2 - ds1) / 3.0;
        } else {
            const double zp = row.z + h, wp = w_at(zp);
            row.dw_fd = (wp - row.w_res) / h;
            row.ds_fd = (s_at(zp, wp) - row.surplus) / h;
        }
        if (row.pooling) {
            rep.max_pooling_dev = std::max(rep.max_pooling_dev, std::abs(row.w_res - x0));
        } else {
            const auto d = active_region_slopes(row.z, row.w_res, row.effort, policy.phi, cfg.prim, F);
            row.dw_analytic = d.dw_res;
            row.ds_analytic = d.dsurplus;
            ++rep.active_points;
            rep.strict_signs = rep.strict_signs && d.dw_res < 0.0 && d.dsurplus > 0.0;
            rep.below_z = rep.below_z && row.w_res < row.z;
            if (row.central)
                rep.max_fd_rel = std::max({rep.max_fd_rel, rel_gap(row.dw_fd, row.dw_analytic),
                                           rel_gap(row.ds_fd, row.ds_analytic)});
        }
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<Check> verification_checks(const ScenarioConfig& cfg, const ScenarioRun& run,
                                       const LemmaReport* lemma) {
    const auto& t = cfg.tol;
    std::vector<Check> c;
    c.push_back(at_most("reservation_match", run.ver.max_reservation_dev, t.reservation));
    c.push_back(at_most("welfare_equivalence", rel_gap(run.ui_report.welfare, run.wi_report.welfare),
                        t.equiv));
    c.push_back(at_most("budget_wi", std::abs(run.wi_report.budget_residual), t.budget));
    c.push_back(at_most("budget_ui", std::abs(run.ui_report.budget_residual), t.budget));
    c.push_back(at_most("direct_vs_concise_wi",
                        rel_gap(run.wi_report.welfare_concise, run.wi_report.welfare), t.concise));
    c.push_back(at_most("direct_vs_concise_ui",
                        rel_gap(run.ui_report.welfare_concise, run.ui_report.welfare), t.concise));
    c.push_back(positive_check("uniqueness_margin", run.ver.min_monotonicity_margin));
    if (cfg.prim.endogenous()) {
        c.push_back(at_most("effort_match", run.ver.max_effort_dev, t.effort));
        if (run.audit) {
            c.push_back(at_most("surplus_audit", run.audit->max_residual, t.surplus));
            c.push_back(positive_check("q_increasing", run.audit->min_knot_increment));
        }
    }
    if (lemma) {
        c.push_back(at_most("pooling", lemma->max_pooling_dev, t.pooling));
        c.push_back({"active_signs", lemma->strict_signs && lemma->below_z ? 1.0 : 0.0, 1.0,
                     lemma->strict_signs && lemma->below_z});
        c.push_back(at_most("derivative_fd", lemma->max_fd_rel, t.derivative));
    }
    return c;
}

json to_json(const WISolution& sol, const WIPolicy& policy) {
    return {{"mode", mode_name(sol.mode)},
            {"T", policy.T},
            {"phi", policy.phi},
            {"x0", nullable(sol.x0)},
            {"z", sol.z_grid},
            {"w_res", sol.w_res},
            {"surplus", sol.surplus},
            {"effort", sol.effort},
            {"value", sol.value}};
}

json to_json(const UIOnlyPolicy& ui) {
    std::vector<double> paid(ui.z_grid.size());
    for (std::size_t i = 0; i < paid.size(); ++i) paid[i] = ui.benefit_at(i);
    json j{{"z", ui.z_grid}, {"b_star", ui.b_star}, {"benefit", paid}};
    if (const auto* l = std::get_if<LumpSumTax>(&ui.tax)) {
        j["tax"] = {{"kind", "lump_sum"}, {"T_star", l->T_star}};
    } else {
        const auto& s = std::get<ScheduleTax>(ui.tax);
        const auto& q = *s.q;
        json knots = json::array();
        for (std::size_t k = 0; k < q.active().x().size(); ++k)
            knots.push_back({q.active().x()[k], q.q_x0() + q.active().y()[k]});
        j["tax"] = {{"kind", "schedule"},
                    {"C", s.C},
                    {"x0", q.x0()},
                    {"q_x0", q.q_x0()},
                    {"curvature", q.curvature()},
                    {"below_slope", q.below_slope()},
                    {"active_knots", knots}};
    }
    return j;
}

json to_json(const WelfareReport& rep) {
    return {{"kind", to_string(rep.kind)},
            {"welfare", rep.welfare},
            {"welfare_concise", rep.welfare_concise},
            {"budget_residual", rep.budget_residual}};
}

json to_json(const oracle::SimReport& rep) {
    json bins = json::array();
    for (const auto& b : rep.hazard)
        bins.push_back({{"z_lo", b.z_lo},
                        {"z_hi", b.z_hi},
                        {"agents", b.agents},
                        {"accepts", b.accepts},
                        {"exposure", b.exposure},
                        {"hazard", b.hazard},
                        {"hazard_se", b.hazard_se},
                        {"alpha", b.alpha}});
    return {{"n_agents", rep.n_agents},
            {"welfare_mean", rep.welfare_mean},
            {"welfare_se", rep.welfare_se},
            {"budget_mean", rep.budget_mean},
            {"budget_se", rep.budget_se},
            {"acceptance_hazard_by_z_bin", bins}};
}

json to_json(const std::vector<Check>& checks) {
    json j = json::array();
    for (const auto& c : checks)
        j.push_back({{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"pass", c.pass}});
    return j;
}

namespace {

int cmd_solve(const ScenarioConfig& cfg, const fs::path& dir) {
    const auto policy = effective_policy(cfg);
    const auto sol = solve_scenario(cfg, policy);
    const auto rep = evaluate_economy(wi_economy(sol, policy), cfg.prim, cfg.offer_dist(),
                                      cfg.prior_dist(), cfg.tol.quad);
    json j = to_json(sol, policy);
    j["welfare"] = to_json(rep);
    write_json(dir, "wi_solution.json", j);
    auto csv = open_artifact(dir, "wi_solution.csv");
    csv << "z,w_res,surplus,effort,value\n";
    for (std::size_t i = 0; i < sol.size(); ++i)
        csv << sol.z_grid[i] << ',' << sol.w_res[i] << ',' << sol.surplus[i] << ',' << sol.effort[i]
            << ',' << sol.value[i] << '\n';
    return kExitOk;
}

int cmd_replicate(const ScenarioConfig& cfg, const fs::path& dir) {
    const auto run = run_scenario(cfg);
    json j = scenario_summary(cfg, run);
    j["policy"] = to_json(run.ui);
    write_json(dir, "ui_policy.json", j);
    if (const auto* s = std::get_if<ScheduleTax>(&run.ui.tax)) {
        const auto F = cfg.offer_dist();
        auto csv = open_artifact(dir, "q_schedule.csv");
        csv << "w,q,tau\n";
        for (double w : uniform_grid(F.lo(), F.hi(), cfg.grid.n_w)) {
            const double c = (*s->q)(w) + s->C;
            csv << w << ',' << c << ',' << w - c << '\n';
        }
    }
    return kExitOk;
}

json verification_json(const ScenarioConfig& cfg, const ScenarioRun& run, const LemmaReport* lemma,
                       const std::vector<Check>& checks) {
    json j = scenario_summary(cfg, run);
    j["max_reservation_dev"] = run.ver.max_reservation_dev;
    j["max_effort_dev"] = run.ver.max_effort_dev;
    j["min_monotonicity_margin"] = run.ver.min_monotonicity_margin;
    j["wi"] = to_json(run.wi_report);
    j["ui"] = to_json(run.ui_report);
    j["welfare_rel_gap"] = rel_gap(run.ui_report.welfare, run.wi_report.welfare);
    if (run.audit) {
        j["surplus_audit"] = {{"max_residual", run.audit->max_residual},
                              {"q_strictly_increasing", run.audit->q_strictly_increasing},
                              {"min_increment", run.audit->min_knot_increment}};
    }
    if (lemma) {
        j["lemma"] = {{"max_pooling_dev", lemma->max_pooling_dev},
                      {"strict_signs", lemma->strict_signs},
                      {"w_res_below_z", lemma->below_z},
                      {"max_fd_rel", lemma->max_fd_rel},
                      {"active_points", lemma->active_points}};
    }
    j["checks"] = to_json(checks);
    j["pass"] = all_pass(checks);
    return j;
}

int cmd_verify(const ScenarioConfig& cfg, const fs::path& dir) {
    const auto run = run_scenario(cfg);
    std::optional<LemmaReport> lemma;
    if (cfg.prim.endogenous()) lemma = lemma_check(cfg, run.policy, run.sol);
    const auto checks = verification_checks(cfg, run, lemma ? &*lemma : nullptr);
    write_json(dir, "verification.json", verification_json(cfg, run, lemma ? &*lemma : nullptr, checks));
    write_per_z(dir, "welfare_wi.csv", run.wi_report);
    write_per_z(dir, "welfare_ui.csv", run.ui_report);
    return all_pass(checks) ? kExitOk : kExitVerification;
}

int cmd_lemma(const ScenarioConfig& cfg, const fs::path& dir) {
    const auto policy = effective_policy(cfg);
    const auto sol = solve_scenario(cfg, policy);
    const auto lemma = lemma_check(cfg, policy, sol);
    auto csv = open_artifact(dir, "lemma.csv");
    csv << "z,w_res,dw_analytic,dw_fd,dS_analytic,dS_fd,region,surplus,effort\n";
    for (const auto& r : lemma.rows)
        csv << r.z << ',' << r.w_res << ',' << r.dw_analytic << ',' << r.dw_fd << ',' << r.ds_analytic
            << ',' << r.ds_fd << ',' << (r.pooling ? "pooling" : "active") << ',' << r.surplus << ','
            << r.effort << '\n';
    const std::vector<Check> checks{
        at_most("pooling", lemma.max_pooling_dev, cfg.tol.pooling),
        {"active_signs", lemma.strict_signs && lemma.below_z ? 1.0 : 0.0, 1.0,
         lemma.strict_signs && lemma.below_z},
        at_most("derivative_fd", lemma.max_fd_rel, cfg.tol.derivative)};
    return all_pass(checks) ? kExitOk : kExitVerification;
}

int cmd_sweep(const ScenarioConfig& cfg, const fs::path& dir) {
    if (!cfg.sweep) throw ConfigError("sweep requires a 'sweep' block with path and values");
    auto csv = open_artifact(dir, "sweep.csv");
    csv << "path,value,status,T,x0,max_reservation_dev,max_effort_dev,welfare_wi,welfare_ui,"
           "welfare_rel_gap,budget_wi,budget_ui,concise_gap_wi,concise_gap_ui,surplus_audit,"
           "q_min_increment,pooling_dev,lemma_signs,lemma_fd_rel,failed_checks,pass\n";
    bool every = true;
    for (double v : cfg.sweep->values) {
        const auto point = with_value(cfg, cfg.sweep->path, v);
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        csv << cfg.sweep->path << ',' << std::string_view(buf, res.ptr - buf) << ',';
        try {
            const auto run = run_scenario(point);
            std::optional<LemmaReport> lemma;
            if (point.prim.endogenous()) lemma = lemma_check(point, run.policy, run.sol);
            const auto checks = verification_checks(point, run, lemma ? &*lemma : nullptr);
            std::string failed;
            for (const auto& c : checks)
                if (!c.pass) failed += (failed.empty() ? "" : ";") + c.name;
            const bool pass = failed.empty();
            every = every && pass;
            auto opt = [&](bool has, double x) -> std::string {
                if (!has) return "";
                std::ostringstream s;
                s << std::setprecision(17) << x;
                return s.str();
            };
            csv << "ok," << run.policy.T << ',' << opt(run.sol.x0.has_value(), run.sol.x0.value_or(0.0))
                << ',' << run.ver.max_reservation_dev << ',' << run.ver.max_effort_dev << ','
                << run.wi_report.welfare << ',' << run.ui_report.welfare << ','
                << rel_gap(run.ui_report.welfare, run.wi_report.welfare) << ','
                << run.wi_report.budget_residual << ',' << run.ui_report.budget_residual << ','
                << rel_gap(run.wi_report.welfare_concise, run.wi_report.welfare) << ','
                << rel_gap(run.ui_report.welfare_concise, run.ui_report.welfare) << ','
                << opt(run.audit.has_value(), run.audit ? run.audit->max_residual : 0.0) << ','
                << opt(run.audit.has_value(), run.audit ? run.audit->min_knot_increment : 0.0) << ','
                << opt(lemma.has_value(), lemma ? lemma->max_pooling_dev : 0.0) << ','
                << (lemma ? (lemma->strict_signs && lemma->below_z ? "1" : "0") : "") << ','
                << opt(lemma.has_value(), lemma ? lemma->max_fd_rel : 0.0) << ',' << failed << ','
                << (pass ? "true" : "false") << '\n';
        } catch (const SolverError& e) {
            every = false;
            csv << "error:" << e.kind() << ",,,,,,,,,,,,,,,,,,false\n";
        }
    }
    return every ? kExitOk : kExitVerification;
}

int cmd_simulate(const ScenarioConfig& cfg, const fs::path& dir, const RunOptions& opt) {
    oracle::SimConfig sim = cfg.sim.value_or(oracle::SimConfig{});
    if (opt.seed) sim.seed = *opt.seed;
    sim.validate(cfg.prim);
    const auto F = cfg.offer_dist();
    const auto H = cfg.prior_dist();
    const auto run = run_scenario(cfg);
    const auto wi = wi_economy(run.sol, run.policy);
    const auto ui = ui_economy(run.ui, run.ver.ui_rule);
    const auto paired = oracle::simulate_paired(wi, ui, cfg.prim, F, H, sim);
    if (opt.trace) {
        auto trace = open_artifact(dir, "sim_trace.csv");
        oracle::simulate_panel(wi, cfg.prim, F, H, sim, &trace);
    }

    std::vector<Check> checks;
    auto within = [&](const std::string& name, double mean, double se, double target) {
        checks.push_back({name, std::abs(mean - target) / se, 3.0, std::abs(mean - target) <= 3.0 * se});
    };
    within("wi_welfare", paired.first.welfare_mean, paired.first.welfare_se, run.wi_report.welfare);
    within("wi_budget", paired.first.budget_mean, paired.first.budget_se, run.wi_report.budget_residual);
    within("ui_welfare", paired.second.welfare_mean, paired.second.welfare_se, run.ui_report.welfare);
    within("ui_budget", paired.second.budget_mean, paired.second.budget_se, run.ui_report.budget_residual);
    within("paired_welfare_diff", paired.welfare_diff_mean, paired.welfare_diff_se, 0.0);
    for (const auto* rep : {&paired.first, &paired.second}) {
        const std::string tag = rep == &paired.first ? "wi" : "ui";
        for (std::size_t k = 0; k < rep->hazard.size(); ++k) {
            const auto& b = rep->hazard[k];
            if (b.accepts == 0) continue;
            within(tag + "_hazard_bin_" + std::to_string(k), b.hazard, b.hazard_se, b.alpha);
        }
    }

    json j = scenario_summary(cfg, run);
    j["sim"] = {{"n_agents", sim.n_agents},
                {"dt", sim.dt},
                {"horizon", sim.horizon},
                {"seed", sim.seed},
                {"antithetic", sim.antithetic}};
    j["wi"] = to_json(paired.first);
    j["wi"]["analytic"] = to_json(run.wi_report);
    j["ui"] = to_json(paired.second);
    j["ui"]["analytic"] = to_json(run.ui_report);
    j["paired"] = {{"welfare_diff_mean", paired.welfare_diff_mean},
                   {"welfare_diff_se", paired.welfare_diff_se}};
    j["checks"] = to_json(checks);
    j["pass"] = all_pass(checks);
    write_json(dir, "sim_report.json", j);
    return all_pass(checks) ? kExitOk : kExitVerification;
}

}  // namespace

int run_command(const std::string& command, const ScenarioConfig& cfg, const RunOptions& opt) {
    const fs::path dir = opt.out_dir.value_or(cfg.output_dir);
    if (command == "solve") return cmd_solve(cfg, dir);
    if (command == "replicate") return cmd_replicate(cfg, dir);
    if (command == "verify") return cmd_verify(cfg, dir);
    if (command == "lemma-check") return cmd_lemma(cfg, dir);
    if (command == "sweep") return cmd_sweep(cfg, dir);
    if (command == "simulate") return cmd_simulate(cfg, dir, opt);
    throw ConfigError("unknown command '" + command +
                      "'; expected solve, replicate, verify, lemma-check, sweep or simulate");
}

}  // namespace mccall
