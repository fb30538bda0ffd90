#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mccall/dist.hpp"
#include "mccall/interp.hpp"

namespace mccall {

// Exogenous: offers arrive at a fixed Poisson rate, no effort choice.
// Endogenous: the worker picks the arrival rate at cost psi(lambda), no free arrivals.
enum class SearchMode { ExogenousArrival, EndogenousSearch };

struct Primitives {
    double r = 0.05;
    SearchMode mode = SearchMode::ExogenousArrival;
    double lambda_bar = 0.0;
    // psi(lambda) = kappa * lambda^(1 + eta) / (1 + eta)
    double kappa = 1.0;
    double eta = 1.0;

    void validate() const;
    bool endogenous() const { return mode == SearchMode::EndogenousSearch; }
    double search_cost(double lambda) const;
};

// Unemployment benefit as a function of the previous wage z.
class BenefitSchedule {
public:
    enum class Kind { Constant, Affine, Table };

    static BenefitSchedule constant(double b);
    static BenefitSchedule affine(double a0, double a1);
    static BenefitSchedule table(std::vector<double> z, std::vector<double> b);

    double operator()(double z) const;
    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    double a0() const { return a0_; }
    double a1() const { return a1_; }
    const MonotoneCubic& table_interp() const { return table_; }

private:
    Kind kind_ = Kind::Constant;
    double a0_ = 0.0, a1_ = 0.0;
    MonotoneCubic table_;
};

struct WIPolicy {
    BenefitSchedule b = BenefitSchedule::constant(0.0);
    double T = 0.0;    // lump-sum tax on the employed
    double phi = 0.0;  // wage-insurance replacement of (z - w)+

    void validate(const Primitives& prim) const;
};

struct SolverOptions {
    double root_tol = 1e-12;
    double quad_tol = 1e-10;
    std::uintmax_t max_iter = 200;
};

// Tables over the previous-wage grid. Immutable once built.
struct WISolution {
    SearchMode mode = SearchMode::ExogenousArrival;
    std::vector<double> z_grid;
    std::vector<double> w_res;
    std::vector<double> surplus;
    std::vector<double> effort;
    std::vector<double> value;
    // Pooling threshold (endogenous mode), or the common reservation wage in
    // exogenous mode when phi = 0 and b is constant. Empty otherwise.
    std::optional<double> x0;

    std::size_t size() const { return z_grid.size(); }
};

// Net-of-tax consumption with wage insurance: w + phi (z - w)+ - T.
double consumption_wi(double w, double z, double phi, double T);
inline double consumption_wi(double w, double z, const WIPolicy& p) {
    return consumption_wi(w, z, p.phi, p.T);
}

struct SearchReturn {
    double value;        // max over lambda of -psi(lambda) + lambda S
    double lambda_star;  // the maximizer; also dR/dS
};
SearchReturn search_return(double surplus, const Primitives& prim);

// Capitalized search surplus when accepting from x with previous wage z:
// (1/r) * integral over [x, hi] of [g(w, z) - g(x, z)] dF(w).
// The integrand splits into (1-phi)(w-x) plus phi(w-z) above z, so it reduces
// to (1/r) [(1-phi) M1(x) + phi M1(max(x, z))] with M1 the first upper moment.
double surplus_given_acceptance(double x, double z, double phi, double r, const Distribution& F);

// Reservation condition residual with exogenous arrivals; strictly increasing in y.
double exogenous_residual(double y, double z, const WIPolicy& policy, const Primitives& prim,
                          const Distribution& F);
// Value of not searching minus value of searching at acceptance wage x (endogenous).
double endogenous_residual(double x, double z, const WIPolicy& policy, const Primitives& prim,
                           const Distribution& F);

double reservation_exogenous(double z, const WIPolicy& policy, const Primitives& prim,
                             const Distribution& F, const SolverOptions& opt = {});

double solve_x0(const WIPolicy& policy, const Primitives& prim, const Distribution& F,
                const SolverOptions& opt = {});

double reservation_endogenous(double z, const WIPolicy& policy, const Primitives& prim,
                              const Distribution& F, double x0, const SolverOptions& opt = {});

struct SurplusEffort {
    double surplus;
    double effort;
};
SurplusEffort surplus_and_effort(double z, double w_res, const WIPolicy& policy,
                                 const Primitives& prim, const Distribution& F);

struct LemmaDerivatives {
    double dw_res;
    double dsurplus;
};

// Slopes of the reservation wage and surplus in z on the active region, from
// the implicit-function formulas. Evaluated at a known (w_res, effort) pair;
// no region check, so it also returns the one-sided limit at z = x0.
LemmaDerivatives active_region_slopes(double z, double w_res, double effort, double phi,
                                      const Primitives& prim, const Distribution& F);

// Re-solves the reservation wage at z and applies the slope formulas.
// Throws ConfigError when z <= x0 (pooling region) or in exogenous mode.
LemmaDerivatives analytic_derivatives(double z, const WISolution& sol, const WIPolicy& policy,
                                      const Primitives& prim, const Distribution& F,
                                      const SolverOptions& opt = {});

// Uniform grid of n points over [lo, hi], endpoints exact.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

WISolution solve_wi(const WIPolicy& policy, const Primitives& prim, const Distribution& F,
                    const Distribution& H, std::size_t n_grid, const SolverOptions& opt = {});

struct TaxBalance {
    double T;
    double residual;
    std::vector<std::pair<double, double>> trace;  // (T, residual) evaluations
};

// Lump-sum tax that balances the government budget of the WI economy.
// The tax in `policy` is ignored.
TaxBalance balance_wi_tax(const WIPolicy& policy, const Primitives& prim, const Distribution& F,
                          const Distribution& H, std::size_t n_grid, const SolverOptions& opt = {});

}  // namespace mccall
