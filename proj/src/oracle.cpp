#include "mccall/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "mccall/errors.hpp"
#include "mccall/interp.hpp"
#include "mccall/quadrature.hpp"

namespace mccall::oracle {

ViResult vi_reservation(double z, const WIPolicy& policy, const Primitives& prim,
                        const Distribution& F, double dt, const ViOptions& opt) {
    if (prim.endogenous()) throw ConfigError("vi_reservation supports exogenous arrivals only");
    if (!(dt > 0.0)) throw ConfigError("vi_reservation: dt must be positive");
    if (opt.n_w < 2) throw ConfigError("vi_reservation: need at least two wage cells");
    const double r = prim.r;
    const double b = policy.b(z);
    const double T = policy.T, phi = policy.phi;
    auto g = [&](double w) { return w + phi * std::max(z - w, 0.0) - T; };

    const std::size_t n = opt.n_w;
    const double cell = (F.hi() - F.lo()) / static_cast<double>(n);
    std::vector<double> wage(n), mass(n), pay(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = F.lo() + cell * static_cast<double>(j);
        const double c = j + 1 == n ? F.hi() : a + cell;
        wage[j] = 0.5 * (a + c);
        mass[j] = F.cdf(c) - F.cdf(a);
        pay[j] = g(wage[j]) / r;  // increasing in w since phi < 1
    }
    // tail_p[j] = P(cell >= j), tail_v[j] = sum over cells >= j of mass * pay
    std::vector<double> tail_p(n + 1, 0.0), tail_v(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) {
        tail_p[j] = tail_p[j + 1] + mass[j];
        tail_v[j] = tail_v[j + 1] + mass[j] * pay[j];
    }

    const double beta = std::exp(-r * dt);
    const double p = -std::expm1(-prim.lambda_bar * dt);
    const double flow = -std::expm1(-r * dt) / r * b;
    auto first_accepted = [&](double v) {
        return static_cast<std::size_t>(std::lower_bound(pay.begin(), pay.end(), v) - pay.begin());
    };

    double v = b / r;
    std::uint64_t it = 0;
    for (;; ++it) {
        if (it >= opt.max_iter) {
            std::ostringstream msg;
            msg << "value iteration did not converge in " << opt.max_iter << " iterations";
            throw SolverError("NonConvergence", msg.str(), z);
        }
        const std::size_t j = first_accepted(v);
        const double best = v * (1.0 - tail_p[j]) + tail_v[j];
        const double next = flow + beta * ((1.0 - p) * v + p * best);
        const double step = std::abs(next - v);
        v = next;
        if (step < opt.tol) break;
    }

    ViResult res{};
    res.value = v;
    res.cell = cell;
    res.iterations = it + 1;
    const std::size_t j = first_accepted(v);
    res.w_grid = j < n ? wage[j] : F.hi();
    // Invert g(w) = r V on whichever branch holds.
    const double level = r * v + T;
    res.w_indiff = level >= z ? level : (level - phi * z) / (1.0 - phi);
    return res;
}

void SimConfig::validate(const Primitives& prim) const {
    if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
    if (!(horizon >= dt)) throw ConfigError("sim.horizon must be at least one step");
    if (!(horizon * prim.r >= 20.0))
        throw ConfigError("sim.horizon * r must be at least 20 to make the discounted tail negligible");
    if (n_agents < 10000) throw ConfigError("sim.n_agents must be at least 10000");
    if (antithetic && n_agents % 2 != 0)
        throw ConfigError("sim.n_agents must be even with antithetic draws");
}

namespace {

struct Rule {
    MonotoneCubic w_res, effort, benefit;
};

Rule interpolated(const Economy& econ) {
    return {MonotoneCubic(econ.rule.z_grid, econ.rule.w_res),
            MonotoneCubic(econ.rule.z_grid, econ.rule.effort),
            MonotoneCubic(econ.rule.z_grid, econ.benefit)};
}

struct Outcome {
    double z;
    double welfare;
    double budget;
    double spell;  // unemployed time, capped at the horizon
    bool accepted;
    double wage;
};

Outcome simulate_agent(const Economy& econ, const Rule& rule, const Primitives& prim,
                       const Distribution& F, const Distribution& H, const SimConfig& cfg,
                       AgentStream& rng) {
    const double r = prim.r;
    Outcome o{};
    o.z = H.sample(rng.next());
    const double w_res = rule.w_res(o.z);
    const double lambda = std::max(rule.effort(o.z), 0.0);
    const double b = rule.benefit(o.z);
    const double cost = prim.endogenous() ? prim.search_cost(lambda) : 0.0;

    double t = cfg.horizon;
    if (lambda > 0.0) {
        // Steps of dt; inside a step offers arrive at exponential gaps, so a step
        // sees at least one offer with probability 1 - exp(-lambda dt).
        for (double start = 0.0; start < cfg.horizon && !o.accepted; start += cfg.dt) {
            const double len = std::min(cfg.dt, cfg.horizon - start);
            double s = 0.0;
            for (;;) {
                s += -std::log1p(-rng.next()) / lambda;
                if (!(s < len)) break;
                const double w = F.sample(rng.next());
                if (w >= w_res) {
                    o.accepted = true;
                    o.wage = w;
                    t = start + s;
                    break;
                }
            }
        }
    }
    o.spell = t;

    const double unemployed_pv = -std::expm1(-r * t) / r;
    o.welfare = (b - cost) * unemployed_pv;
    o.budget = -b * unemployed_pv;
    if (o.accepted) {
        const double employed_pv = std::exp(-r * t) * (-std::expm1(-r * (cfg.horizon - t))) / r;
        const double c = consumption(econ.consumption, o.wage, o.z);
        o.welfare += c * employed_pv;
        o.budget += (o.wage - c) * employed_pv;
    }
    return o;
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = quad::pairwise_sum(x) / n;
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
    const double var = x.size() > 1 ? quad::pairwise_sum(dev) / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

// Per-unit values: one per agent, or one per antithetic pair.
struct Panel {
    std::vector<double> welfare, budget;
    SimReport report;
};

Panel run_panel(const Economy& econ, const Primitives& prim, const Distribution& F,
                const Distribution& H, const SimConfig& cfg, std::ostream* trace) {
    prim.validate();
    cfg.validate(prim);
    const Rule rule = interpolated(econ);
    const std::size_t units = cfg.antithetic ? cfg.n_agents / 2 : cfg.n_agents;
    const std::size_t per_unit = cfg.antithetic ? 2 : 1;

    Panel out;
    out.welfare.assign(units, 0.0);
    out.budget.assign(units, 0.0);
    auto& bins = out.report.hazard;
    bins.resize(kHazardBins);
    const double width = (H.hi() - H.lo()) / static_cast<double>(kHazardBins);
    for (std::size_t k = 0; k < kHazardBins; ++k) {
        bins[k].z_lo = H.lo() + width * static_cast<double>(k);
        bins[k].z_hi = k + 1 == kHazardBins ? H.hi() : bins[k].z_lo + width;
    }
    std::vector<double> alpha_exposure(kHazardBins, 0.0);

    if (trace) {
        *trace << "agent_id,z,spell_length,accepted_wage\n";
        trace->precision(17);
    }
    for (std::size_t u = 0; u < units; ++u) {
        for (std::size_t m = 0; m < per_unit; ++m) {
            AgentStream rng(cfg.seed, u, m == 1);
            const Outcome o = simulate_agent(econ, rule, prim, F, H, cfg, rng);
            out.welfare[u] += o.welfare / static_cast<double>(per_unit);
            out.budget[u] += o.budget / static_cast<double>(per_unit);

            auto k = static_cast<std::size_t>((o.z - H.lo()) / width);
            k = std::min(k, kHazardBins - 1);
            auto& bin = bins[k];
            ++bin.agents;
            bin.accepts += o.accepted ? 1 : 0;
            bin.exposure += o.spell;
            const double alpha = std::max(rule.effort(o.z), 0.0) * F.survival(rule.w_res(o.z));
            alpha_exposure[k] += alpha * o.spell;

            if (trace) {
                *trace << u * per_unit + m << ',' << o.z << ',' << o.spell << ',';
                if (o.accepted) *trace << o.wage;
                *trace << '\n';
            }
        }
    }
    for (std::size_t k = 0; k < kHazardBins; ++k) {
        auto& bin = bins[k];
        if (bin.exposure > 0.0) {
            bin.hazard = static_cast<double>(bin.accepts) / bin.exposure;
            bin.hazard_se = std::sqrt(static_cast<double>(bin.accepts)) / bin.exposure;
            bin.alpha = alpha_exposure[k] / bin.exposure;
        }
    }

    const auto w = mean_se(out.welfare);
    const auto bgt = mean_se(out.budget);
    out.report.n_agents = cfg.n_agents;
    out.report.welfare_mean = w.mean;
    out.report.welfare_se = w.se;
    out.report.budget_mean = bgt.mean;
    out.report.budget_se = bgt.se;
    return out;
}

}  // namespace

SimReport simulate_panel(const Economy& econ, const Primitives& prim, const Distribution& F,
                         const Distribution& H, const SimConfig& cfg, std::ostream* trace) {
    return run_panel(econ, prim, F, H, cfg, trace).report;
}

PairedReport simulate_paired(const Economy& first, const Economy& second, const Primitives& prim,
                             const Distribution& F, const Distribution& H, const SimConfig& cfg) {
    auto a = run_panel(first, prim, F, H, cfg, nullptr);
    auto b = run_panel(second, prim, F, H, cfg, nullptr);
    std::vector<double> diff(a.welfare.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.welfare[i] - b.welfare[i];
    const auto d = mean_se(diff);
    PairedReport out;
    out.first = std::move(a.report);
    out.second = std::move(b.report);
    out.welfare_diff_mean = d.mean;
    out.welfare_diff_se = d.se;
    return out;
}

}  // namespace mccall::oracle
