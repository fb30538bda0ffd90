#include "mccall/welfare.hpp"

#include <cmath>

#include "mccall/errors.hpp"
#include "mccall/quadrature.hpp"

namespace mccall {

namespace {

// Below this acceptance probability a type is treated as never employed.
constexpr double kSurvivalGuard = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct AcceptedMasses {
    double consumption;  // integral over accepted wages of c(w, z) dF
    double receipts;     // integral over accepted wages of (w - c(w, z)) dF
};

AcceptedMasses accepted_masses(const ConsumptionRule& rule, double w_res, double z, double survival,
                               double wage_mass, const Distribution& F, double tol) {
    return std::visit(
        overloaded{
            [&](const WageInsuranceConsumption& c) -> AcceptedMasses {
                const double kink[] = {z};
                const double cons = F.upper_integral(
                    w_res, [&](double w) { return consumption_wi(w, z, c.phi, c.T); }, kink, tol);
                double payout = 0.0;
                if (c.phi != 0.0 && z > w_res)
                    payout = F.upper_integral(
                        w_res, [&](double w) { return c.phi * std::max(z - w, 0.0); }, kink, tol);
                return {cons, c.T * survival - payout};
            },
            [&](const LumpSumConsumption& c) -> AcceptedMasses {
                return {wage_mass - c.T * survival, c.T * survival};
            },
            [&](const ScheduleConsumption& c) -> AcceptedMasses {
                const double q_mass = c.q->tail_mass(w_res);
                return {q_mass + c.C * survival, wage_mass - q_mass - c.C * survival};
            }},
        rule);
}

void check_shapes(const Economy& econ) {
    const auto n = econ.rule.z_grid.size();
    if (n < 2 || econ.rule.w_res.size() != n || econ.rule.effort.size() != n ||
        econ.benefit.size() != n)
        throw ConfigError("economy tables must share the z-grid length");
}

}  // namespace

std::string to_string(EconomyKind k) { return k == EconomyKind::WI ? "WI" : "UI-only"; }

Economy wi_economy(const WISolution& sol, const WIPolicy& policy) {
    Economy e;
    e.kind = EconomyKind::WI;
    e.rule = {sol.z_grid, sol.w_res, sol.effort};
    e.benefit.reserve(sol.size());
    for (double z : sol.z_grid) e.benefit.push_back(policy.b(z));
    e.consumption = WageInsuranceConsumption{policy.T, policy.phi};
    return e;
}

double consumption(const ConsumptionRule& rule, double w, double z) {
    return std::visit(overloaded{[&](const WageInsuranceConsumption& c) {
                                     return consumption_wi(w, z, c.phi, c.T);
                                 },
                                 [&](const LumpSumConsumption& c) { return w - c.T; },
                                 [&](const ScheduleConsumption& c) { return (*c.q)(w) + c.C; }},
                      rule);
}

PvWeights pv_weights(double alpha, double r) { return {1.0 / (alpha + r), alpha / (alpha + r)}; }

double acceptance_rate(double effort, double w_res, const Distribution& F) {
    return effort * F.survival(w_res);
}

double acceptance_rate(double z, const WISolution& sol, const Distribution& F) {
    const MonotoneCubic w(sol.z_grid, sol.w_res);
    const MonotoneCubic lam(sol.z_grid, sol.effort);
    return acceptance_rate(lam(z), w(z), F);
}

std::vector<double> prior_weights(const std::vector<double>& z_grid, const Distribution& H) {
    std::vector<double> wts(z_grid.size(), 0.0);
    for (std::size_t i = 0; i + 1 < z_grid.size(); ++i) {
        const double a = z_grid[i], b = z_grid[i + 1], h = b - a;
        wts[i] += quad::gl32([&](double z) { return (b - z) / h * H.pdf(z); }, a, b);
        wts[i + 1] += quad::gl32([&](double z) { return (z - a) / h * H.pdf(z); }, a, b);
    }
    return wts;
}

WelfareReport evaluate_economy(const Economy& econ, const Primitives& prim, const Distribution& F,
                               const Distribution& H, double quad_tol) {
    check_shapes(econ);
    const auto& z_grid = econ.rule.z_grid;
    const auto wts = prior_weights(z_grid, H);
    const double r = prim.r;

    WelfareReport rep;
    rep.kind = econ.kind;
    rep.per_z.reserve(z_grid.size());
    std::vector<double> direct(z_grid.size()), concise(z_grid.size()), budget(z_grid.size());

    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        WelfareRow row{};
        row.z = z_grid[i];
        row.w_res = econ.rule.w_res[i];
        row.benefit = econ.benefit[i];
        const double effort = econ.rule.effort[i];
        row.search_cost = prim.endogenous() ? prim.search_cost(effort) : 0.0;

        const double surv = F.survival(row.w_res);
        const bool employable = surv >= kSurvivalGuard && effort > 0.0;
        row.alpha = employable ? effort * surv : 0.0;
        const auto pv = pv_weights(row.alpha, r);
        row.u_weight = pv.unemployed;
        row.e_weight = pv.employed;

        if (employable) {
            const double wage_mass = F.upper_partial_moment(row.w_res, 1) + row.w_res * surv;
            const auto m = accepted_masses(econ.consumption, row.w_res, row.z, surv, wage_mass, F,
                                           quad_tol);
            row.expected_wage = wage_mass / surv;
            row.expected_consumption = m.consumption / surv;
            row.expected_receipts = m.receipts / surv;
        }
        const double flow = row.benefit - row.search_cost;
        row.welfare_contrib = row.u_weight * flow + row.e_weight * row.expected_consumption / r;
        row.budget_contrib = -row.u_weight * row.benefit + row.e_weight * row.expected_receipts / r;
        direct[i] = wts[i] * row.welfare_contrib;
        concise[i] = wts[i] * (row.e_weight * row.expected_wage / r - row.u_weight * row.search_cost);
        budget[i] = wts[i] * row.budget_contrib;
        rep.per_z.push_back(row);
    }
    rep.welfare = quad::pairwise_sum(direct);
    rep.welfare_concise = quad::pairwise_sum(concise);
    rep.budget_residual = quad::pairwise_sum(budget);
    return rep;
}

double exante_welfare(const Economy& econ, const Primitives& prim, const Distribution& F,
                      const Distribution& H, WelfareForm form, double quad_tol) {
    const auto rep = evaluate_economy(econ, prim, F, H, quad_tol);
    return form == WelfareForm::Direct ? rep.welfare : rep.welfare_concise;
}

double budget_residual(const Economy& econ, const Primitives& prim, const Distribution& F,
                       const Distribution& H, double quad_tol) {
    return evaluate_economy(econ, prim, F, H, quad_tol).budget_residual;
}

}  // namespace mccall
