#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "mccall/dist.hpp"
#include "mccall/interp.hpp"
#include "mccall/model.hpp"
#include "mccall/schedule.hpp"
#include "mccall/welfare.hpp"

namespace mccall {

struct LumpSumTax {
    double T_star;
};

// Consumption q(w) + C when employed; benefit b*(z) + C when unemployed.
struct ScheduleTax {
    std::shared_ptr<const ConsumptionSchedule> q;
    double C;
    // b*(z) - q(x0) + R(surplus at x0) per grid z. The same benefits as b_star,
    // measured from the junction so pooled types resolve their reservation
    // wage below the rounding of the absolute table.
    std::vector<double> b_gap;
};

// A UI-only policy: benefits depend on the previous wage, taxes on the current one.
struct UIOnlyPolicy {
    std::vector<double> z_grid;
    std::vector<double> b_star;  // before the level shift C
    std::variant<LumpSumTax, ScheduleTax> tax;

    bool is_lump_sum() const { return std::holds_alternative<LumpSumTax>(tax); }
    double shift() const;
    // Benefit actually paid at grid point i (includes C for the schedule variant).
    double benefit_at(std::size_t i) const { return b_star[i] + shift(); }
    // Benefit at arbitrary z, monotone-cubic between grid points.
    double benefit(double z) const;
    ConsumptionRule consumption_rule() const;
};

// Replication with exogenous arrivals. b*(z) = K(z) - T* with
// K(z) = w(z) - (lambda_bar / r) M1(w(z)), and T* closing the budget.
UIOnlyPolicy construct_ui_exogenous(const WISolution& sol, const Primitives& prim,
                                    const Distribution& F, const Distribution& H);

// Surplus-matching consumption schedule for the endogenous-search economy.
// The level is anchored at q(x0) = x0 - T; the budget shift C absorbs it later.
std::shared_ptr<const ConsumptionSchedule> construct_consumption_schedule(
    const WISolution& sol, const WIPolicy& policy, const Primitives& prim, const Distribution& F,
    const SolverOptions& opt = {});

struct EndogenousBenefits {
    std::vector<double> b_star;
    std::vector<double> surplus;  // surplus under q at each w(z)
    std::vector<double> effort;   // optimal effort under q at each w(z)
    std::vector<double> b_gap;    // see ScheduleTax
};

// R(s0 + ds) - R(s0) for the power search cost, accurate when ds is small.
double search_return_shift(double s0, double ds, const Primitives& prim);

EndogenousBenefits construct_benefits_endogenous(const ConsumptionSchedule& q,
                                                 const WISolution& sol, const Primitives& prim);

// Level shift C that balances the budget of a schedule-variant policy whose
// decision rule is `rule`. Linear in C, solved in closed form.
double balance_budget_shift(const UIOnlyPolicy& policy, const DecisionRule& rule,
                            const Primitives& prim, const Distribution& F, const Distribution& H,
                            double quad_tol = 1e-10);

// Full endogenous construction: q, b*, then C.
UIOnlyPolicy construct_ui_endogenous(const WISolution& sol, const WIPolicy& policy,
                                     const Primitives& prim, const Distribution& F,
                                     const Distribution& H, const SolverOptions& opt = {});

// Residual of the UI-only reservation condition at candidate y for type z.
// Strictly increasing in y when the construction is valid.
double ui_reservation_residual(double y, std::size_t z_index, const UIOnlyPolicy& policy,
                               const Primitives& prim, const Distribution& F);

struct VerificationReport {
    DecisionRule ui_rule;  // re-solved from scratch in the UI-only economy
    double max_reservation_dev = 0.0;
    double max_effort_dev = 0.0;
    // Smallest increment of the reservation residual over a 101-point scan of
    // the offer support, across all z. Positive means strictly increasing.
    double min_monotonicity_margin = 0.0;
};

inline constexpr std::size_t kUniquenessScanPoints = 101;

VerificationReport verify_replication(const UIOnlyPolicy& policy, const WISolution& sol,
                                      const Primitives& prim, const Distribution& F,
                                      const SolverOptions& opt = {});

Economy ui_economy(const UIOnlyPolicy& policy, const DecisionRule& rule);

struct SurplusAudit {
    double max_residual = 0.0;  // max over grid z of |surplus under q - S(z)|
    bool q_strictly_increasing = false;
    double min_knot_increment = 0.0;
};

SurplusAudit audit_surplus_match(const ConsumptionSchedule& q, const WISolution& sol,
                                 const Primitives& prim);

}  // namespace mccall
