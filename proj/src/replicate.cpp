#include "mccall/replicate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mccall/errors.hpp"
#include "mccall/quadrature.hpp"
#include "mccall/roots.hpp"

namespace mccall {

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

void require_shapes(const UIOnlyPolicy& p) {
    if (p.z_grid.size() != p.b_star.size() || p.z_grid.size() < 2)
        throw ConfigError("UI policy benefit table must match its z-grid");
}

}  // namespace

double UIOnlyPolicy::shift() const {
    if (const auto* s = std::get_if<ScheduleTax>(&tax)) return s->C;
    return 0.0;
}

double UIOnlyPolicy::benefit(double z) const {
    return MonotoneCubic(z_grid, b_star)(z) + shift();
}

ConsumptionRule UIOnlyPolicy::consumption_rule() const {
    if (const auto* l = std::get_if<LumpSumTax>(&tax)) return LumpSumConsumption{l->T_star};
    const auto& s = std::get<ScheduleTax>(tax);
    return ScheduleConsumption{s.q, s.C};
}

UIOnlyPolicy construct_ui_exogenous(const WISolution& sol, const Primitives& prim,
                                    const Distribution& F, const Distribution& H) {
    if (prim.endogenous()) throw ConfigError("construct_ui_exogenous requires exogenous arrival");
    const double r = prim.r;
    const auto wts = prior_weights(sol.z_grid, H);
    std::vector<double> k(sol.size());
    std::vector<double> benefit_terms(sol.size()), tax_terms(sol.size());
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const double w = sol.w_res[i];
        k[i] = w - prim.lambda_bar / r * F.upper_partial_moment(w, 1);
        const auto pv = pv_weights(acceptance_rate(prim.lambda_bar, w, F), r);
        // Budget: sum_i wts_i [ -u_i (K_i - T*) + e_i T* / r ] = 0.
        benefit_terms[i] = wts[i] * pv.unemployed * k[i];
        tax_terms[i] = wts[i] * (pv.unemployed + pv.employed / r);
    }
    const double t_star = quad::pairwise_sum(benefit_terms) / quad::pairwise_sum(tax_terms);

    UIOnlyPolicy out;
    out.z_grid = sol.z_grid;
    out.b_star.resize(sol.size());
    for (std::size_t i = 0; i < sol.size(); ++i) out.b_star[i] = k[i] - t_star;
    out.tax = LumpSumTax{t_star};
    return out;
}

std::shared_ptr<const ConsumptionSchedule> construct_consumption_schedule(
    const WISolution& sol, const WIPolicy& policy, const Primitives& prim, const Distribution& F,
    const SolverOptions& opt) {
    if (!prim.endogenous() || !sol.x0)
        throw ConfigError("construct_consumption_schedule requires an endogenous-search solution");
    const double x0 = *sol.x0;
    if (!(x0 > F.lo() && x0 < F.hi()))
        throw SolverError("ReservationOutOfSupport",
                          "x0=" + fmt(x0) + " must lie inside the offer support");
    const double r = prim.r;
    const double phi = policy.phi;

    const double m1 = F.upper_partial_moment(x0, 1);
    const double m2 = F.upper_partial_moment(x0, 2);
    const double curvature = m1 / m2;
    const double q_x0 = x0 - policy.T;

    // dQ/dz where Q(z) = q(w(z)); a function of z alone.
    auto q_slope_in_z = [&](double z, double w, double effort) {
        const auto d = active_region_slopes(z, w, effort, phi, prim, F);
        return -r * d.dsurplus / F.survival(w);
    };

    struct Slope {
        double w;   // reservation wage at z
        double f;   // dQ/dz
        double dq;  // q'(w)
    };
    auto slope_at = [&](double z) {
        const double w = reservation_endogenous(z, policy, prim, F, x0, opt);
        const double lam = surplus_and_effort(z, w, policy, prim, F).effort;
        const double f = q_slope_in_z(z, w, lam);
        return Slope{w, f, f / active_region_slopes(z, w, lam, phi, prim, F).dw_res};
    };

    std::vector<double> w_knots, q_knots, dq_knots;
    if (phi > 0.0) {
        // Integrated as q - q(x0) to keep precision next to the junction.
        double z_prev = x0, q_prev = 0.0, f_prev = 0.0;  // A = B at z = x0
        for (std::size_t i = 0; i < sol.size(); ++i) {
            const double z = sol.z_grid[i];
            if (!(z > x0)) continue;
            // Two Simpson steps per grid interval; the right-hand side does not
            // depend on Q. The interval midpoint becomes a knot as well.
            const double h = z - z_prev;
            const double zm = z_prev + 0.5 * h;
            const auto fm = slope_at(zm);
            const double qm = q_prev + h / 12.0 * (f_prev + 4.0 * slope_at(z_prev + 0.25 * h).f + fm.f);
            const double fi = q_slope_in_z(z, sol.w_res[i], sol.effort[i]);
            const double q = qm + h / 12.0 * (fm.f + 4.0 * slope_at(z_prev + 0.75 * h).f + fi);
            w_knots.push_back(fm.w);
            q_knots.push_back(qm);
            dq_knots.push_back(fm.dq);
            const auto d = active_region_slopes(z, sol.w_res[i], sol.effort[i], phi, prim, F);
            w_knots.push_back(sol.w_res[i]);
            q_knots.push_back(q);
            dq_knots.push_back(fi / d.dw_res);
            z_prev = z;
            q_prev = q;
            f_prev = fi;
        }
    }

    MonotoneCubic active;
    if (!w_knots.empty()) {
        // z increases while w(z) decreases: reverse into increasing w, then close at x0.
        std::reverse(w_knots.begin(), w_knots.end());
        std::reverse(q_knots.begin(), q_knots.end());
        std::reverse(dq_knots.begin(), dq_knots.end());
        w_knots.push_back(x0);
        q_knots.push_back(0.0);
        dq_knots.push_back(0.0);
        for (std::size_t k = 0; k + 1 < w_knots.size(); ++k) {
            if (!(w_knots[k + 1] > w_knots[k]))
                throw SolverError("NonMonotoneSchedule",
                                  "reservation wages are not strictly decreasing in z near w=" +
                                      fmt(w_knots[k]));
            if (!(q_knots[k + 1] > q_knots[k]))
                throw SolverError("NonMonotoneSchedule",
                                  "constructed q is not strictly increasing near w=" + fmt(w_knots[k]));
        }
        active = MonotoneCubic(std::move(w_knots), std::move(q_knots), std::move(dq_knots));
    }
    return std::make_shared<const ConsumptionSchedule>(std::move(active), x0, q_x0, curvature, F);
}

double search_return_shift(double s0, double ds, const Primitives& prim) {
    const double r0 = search_return(s0, prim).value;
    if (s0 + ds <= 0.0) return -r0;
    if (s0 <= 0.0) return search_return(ds, prim).value;
    const double p = (1.0 + prim.eta) / prim.eta;
    return r0 * std::expm1(p * std::log1p(ds / s0));
}

EndogenousBenefits construct_benefits_endogenous(const ConsumptionSchedule& q,
                                                 const WISolution& sol, const Primitives& prim) {
    EndogenousBenefits out;
    out.b_star.resize(sol.size());
    out.surplus.resize(sol.size());
    out.effort.resize(sol.size());
    out.b_gap.resize(sol.size());
    const double s0 = q.surplus_at_x0(prim.r);
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const double w = sol.w_res[i];
        const double ds = q.surplus_shift(w, prim.r);
        const double s = std::max(s0 + ds, 0.0);
        const auto sr = search_return(s, prim);
        out.surplus[i] = s;
        out.effort[i] = sr.lambda_star;
        // q(w) + psi(lambda) - lambda * S = q(w) - R(S)
        out.b_star[i] = q(w) - sr.value;
        out.b_gap[i] = q.excess(w) - search_return_shift(s0, ds, prim);
    }
    return out;
}

double balance_budget_shift(const UIOnlyPolicy& policy, const DecisionRule& rule,
                            const Primitives& prim, const Distribution& F, const Distribution& H,
                            double quad_tol) {
    const auto* sched = std::get_if<ScheduleTax>(&policy.tax);
    if (!sched) throw ConfigError("balance_budget_shift applies to the schedule variant only");
    UIOnlyPolicy unshifted = policy;
    unshifted.tax = ScheduleTax{sched->q, 0.0, sched->b_gap};
    const auto rep = evaluate_economy(ui_economy(unshifted, rule), prim, F, H, quad_tol);

    // Each unit of C adds one unit to benefits and removes one from receipts.
    const auto wts = prior_weights(rule.z_grid, H);
    std::vector<double> slope(wts.size());
    bool any_employed = false;
    for (std::size_t i = 0; i < wts.size(); ++i) {
        const auto& row = rep.per_z[i];
        any_employed = any_employed || row.alpha > 0.0;
        slope[i] = wts[i] * (row.u_weight + row.e_weight / prim.r);
    }
    if (!any_employed)
        throw SolverError("DegenerateBudget", "no type is ever employed; the level shift is not identified");
    return rep.budget_residual / quad::pairwise_sum(slope);
}

UIOnlyPolicy construct_ui_endogenous(const WISolution& sol, const WIPolicy& policy,
                                     const Primitives& prim, const Distribution& F,
                                     const Distribution& H, const SolverOptions& opt) {
    auto q = construct_consumption_schedule(sol, policy, prim, F, opt);
    auto ben = construct_benefits_endogenous(*q, sol, prim);
    UIOnlyPolicy out;
    out.z_grid = sol.z_grid;
    out.b_star = std::move(ben.b_star);
    out.tax = ScheduleTax{q, 0.0, ben.b_gap};
    const DecisionRule rule{sol.z_grid, sol.w_res, sol.effort};
    const double c = balance_budget_shift(out, rule, prim, F, H, opt.quad_tol);
    out.tax = ScheduleTax{q, c, std::move(ben.b_gap)};
    return out;
}

double ui_reservation_residual(double y, std::size_t i, const UIOnlyPolicy& policy,
                               const Primitives& prim, const Distribution& F) {
    if (const auto* l = std::get_if<LumpSumTax>(&policy.tax))
        return y - l->T_star - policy.b_star[i] - prim.lambda_bar / prim.r * F.upper_partial_moment(y, 1);
    // q(y) - b*(z) - R(S(y)), with every term measured from the junction x0.
    // The level shift C enters consumption and benefit alike and cancels.
    const auto& sched = std::get<ScheduleTax>(policy.tax);
    const auto& q = *sched.q;
    const double s0 = q.surplus_at_x0(prim.r);
    return q.excess(y) - search_return_shift(s0, q.surplus_shift(y, prim.r), prim) - sched.b_gap[i];
}

VerificationReport verify_replication(const UIOnlyPolicy& policy, const WISolution& sol,
                                      const Primitives& prim, const Distribution& F,
                                      const SolverOptions& opt) {
    require_shapes(policy);
    if (policy.z_grid.size() != sol.size()) throw ConfigError("policy and solution grids differ");
    if (policy.is_lump_sum() == prim.endogenous())
        throw ConfigError("policy variant does not match the search mode");

    VerificationReport rep;
    rep.ui_rule.z_grid = policy.z_grid;
    rep.ui_rule.w_res.resize(sol.size());
    rep.ui_rule.effort.resize(sol.size());
    rep.min_monotonicity_margin = std::numeric_limits<double>::infinity();
    const auto scan = uniform_grid(F.lo(), F.hi(), kUniquenessScanPoints);

    for (std::size_t i = 0; i < sol.size(); ++i) {
        const double z = policy.z_grid[i];
        auto f = [&](double y) { return ui_reservation_residual(y, i, policy, prim, F); };

        double prev = f(scan.front());
        int sign_changes = 0;
        for (std::size_t k = 1; k < scan.size(); ++k) {
            const double cur = f(scan[k]);
            rep.min_monotonicity_margin = std::min(rep.min_monotonicity_margin, cur - prev);
            if ((cur > 0.0) != (prev > 0.0)) ++sign_changes;
            prev = cur;
        }
        if (sign_changes > 1)
            throw SolverError("NonUniqueRoot",
                              "reservation residual changes sign " + std::to_string(sign_changes) +
                                  " times at z=" + fmt(z),
                              z);
        if (f(F.lo()) >= 0.0 || f(F.hi()) <= 0.0)
            throw SolverError("ReservationOutOfSupport",
                              "UI-only reservation wage outside the offer support at z=" + fmt(z), z);

        const double y = find_root(f, F.lo(), F.hi(), RootOptions{0.0, opt.max_iter}).x;
        double effort = prim.lambda_bar;
        if (const auto* s = std::get_if<ScheduleTax>(&policy.tax))
            effort = search_return(
                         std::max(s->q->surplus_at_x0(prim.r) + s->q->surplus_shift(y, prim.r), 0.0),
                         prim)
                         .lambda_star;
        rep.ui_rule.w_res[i] = y;
        rep.ui_rule.effort[i] = effort;
        rep.max_reservation_dev = std::max(rep.max_reservation_dev, std::abs(y - sol.w_res[i]));
        rep.max_effort_dev = std::max(rep.max_effort_dev, std::abs(effort - sol.effort[i]));
    }
    return rep;
}

Economy ui_economy(const UIOnlyPolicy& policy, const DecisionRule& rule) {
    require_shapes(policy);
    Economy e;
    e.kind = EconomyKind::UiOnly;
    e.rule = rule;
    e.benefit.resize(policy.z_grid.size());
    for (std::size_t i = 0; i < policy.z_grid.size(); ++i) e.benefit[i] = policy.benefit_at(i);
    e.consumption = policy.consumption_rule();
    return e;
}

SurplusAudit audit_surplus_match(const ConsumptionSchedule& q, const WISolution& sol,
                                 const Primitives& prim) {
    SurplusAudit a;
    for (std::size_t i = 0; i < sol.size(); ++i)
        a.max_residual =
            std::max(a.max_residual, std::abs(q.surplus(sol.w_res[i], prim.r) - sol.surplus[i]));

    // Knots of the active piece plus a fine sweep of the whole offer support.
    std::vector<double> w = q.knots();
    const auto& F = q.offer_dist();
    for (double x : uniform_grid(F.lo(), F.hi(), 2001)) w.push_back(x);
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    a.min_knot_increment = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < w.size(); ++k)
        a.min_knot_increment = std::min(a.min_knot_increment, q(w[k + 1]) - q(w[k]));
    a.q_strictly_increasing = a.min_knot_increment > 0.0;
    return a;
}

}  // namespace mccall
