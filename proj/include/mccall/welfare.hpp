#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mccall/dist.hpp"
#include "mccall/model.hpp"
#include "mccall/schedule.hpp"

namespace mccall {

// Reservation wage and search effort per grid point of previous wages.
struct DecisionRule {
    std::vector<double> z_grid;
    std::vector<double> w_res;
    std::vector<double> effort;
};

struct WageInsuranceConsumption {
    double T;
    double phi;
};
struct LumpSumConsumption {
    double T;
};
struct ScheduleConsumption {
    std::shared_ptr<const ConsumptionSchedule> q;
    double C;
};
using ConsumptionRule =
    std::variant<WageInsuranceConsumption, LumpSumConsumption, ScheduleConsumption>;

enum class EconomyKind { WI, UiOnly };
std::string to_string(EconomyKind k);

// Everything welfare and budget accounting needs about one economy: who
// accepts what, how hard they search, what the unemployed receive, and what
// the employed consume. Receipts of the government are w - consumption.
struct Economy {
    EconomyKind kind = EconomyKind::WI;
    DecisionRule rule;
    std::vector<double> benefit;  // flow benefit at each grid z
    ConsumptionRule consumption;
};

Economy wi_economy(const WISolution& sol, const WIPolicy& policy);

double consumption(const ConsumptionRule& rule, double w, double z);

struct PvWeights {
    double unemployed;  // 1 / (alpha + r): PV weight on flows received while unemployed
    double employed;    // alpha / (alpha + r): PV weight on the employment continuation
};
PvWeights pv_weights(double alpha, double r);

// alpha = effort * (1 - F(w_res)).
double acceptance_rate(double effort, double w_res, const Distribution& F);
// alpha at an arbitrary z from the solution's tables (monotone-cubic interpolation).
double acceptance_rate(double z, const WISolution& sol, const Distribution& F);

// Weights w_i with sum_i w_i f(z_i) = integral of the piecewise-linear
// interpolant of f against dH. Sums to one when the grid spans H's support.
std::vector<double> prior_weights(const std::vector<double>& z_grid, const Distribution& H);

struct WelfareRow {
    double z;
    double alpha;
    double w_res;
    double benefit;
    double search_cost;
    double expected_consumption;  // E[c | accept]
    double expected_receipts;     // E[w - c | accept]
    double expected_wage;         // E[w | accept]
    double u_weight;
    double e_weight;
    double welfare_contrib;  // integrand of the direct welfare form at z
    double budget_contrib;
};

struct WelfareReport {
    EconomyKind kind = EconomyKind::WI;
    double welfare = 0.0;          // direct form
    double welfare_concise = 0.0;  // budget-substituted form
    double budget_residual = 0.0;  // PV receipts minus PV benefits; zero is balanced
    std::vector<WelfareRow> per_z;
};

enum class WelfareForm { Direct, Concise };

WelfareReport evaluate_economy(const Economy& econ, const Primitives& prim, const Distribution& F,
                               const Distribution& H, double quad_tol = 1e-10);

double exante_welfare(const Economy& econ, const Primitives& prim, const Distribution& F,
                      const Distribution& H, WelfareForm form = WelfareForm::Direct,
                      double quad_tol = 1e-10);

double budget_residual(const Economy& econ, const Primitives& prim, const Distribution& F,
                       const Distribution& H, double quad_tol = 1e-10);

}  // namespace mccall
