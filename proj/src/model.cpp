#include "mccall/model.hpp"

#include <cmath>
#include <sstream>

#include "mccall/errors.hpp"
#include "mccall/roots.hpp"

namespace mccall {

namespace {

RootOptions root_options(const SolverOptions& opt) { return {opt.root_tol, opt.max_iter}; }

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

[[noreturn]] void out_of_support(double root_side, const Distribution& F, double z) {
    throw SolverError("ReservationOutOfSupport",
                      "reservation wage lies " + std::string(root_side < 0 ? "below" : "above") +
                          " the open offer support (" + fmt(F.lo()) + ", " + fmt(F.hi()) +
                          ") at z=" + fmt(z),
                      z);
}

}  // namespace

void Primitives::validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("r must be positive and finite");
    if (!(kappa > 0.0) || !(eta > 0.0)) throw ConfigError("kappa and eta must be positive");
    if (mode == SearchMode::ExogenousArrival && !(lambda_bar > 0.0))
        throw ConfigError("exogenous arrival requires lambda_bar > 0");
    if (mode == SearchMode::EndogenousSearch && lambda_bar != 0.0)
        throw ConfigError("endogenous search requires lambda_bar = 0");
}

double Primitives::search_cost(double lambda) const {
    return kappa * std::pow(lambda, 1.0 + eta) / (1.0 + eta);
}

BenefitSchedule BenefitSchedule::constant(double b) {
    BenefitSchedule s;
    s.kind_ = Kind::Constant;
    s.a0_ = b;
    return s;
}

BenefitSchedule BenefitSchedule::affine(double a0, double a1) {
    BenefitSchedule s;
    s.kind_ = Kind::Affine;
    s.a0_ = a0;
    s.a1_ = a1;
    return s;
}

BenefitSchedule BenefitSchedule::table(std::vector<double> z, std::vector<double> b) {
    BenefitSchedule s;
    s.kind_ = Kind::Table;
    s.table_ = MonotoneCubic(std::move(z), std::move(b));
    return s;
}

double BenefitSchedule::operator()(double z) const {
    switch (kind_) {
        case Kind::Constant: return a0_;
        case Kind::Affine: return a0_ + a1_ * z;
        case Kind::Table: return table_(z);
    }
    return a0_;
}

void WIPolicy::validate(const Primitives& prim) const {
    if (!(phi >= 0.0 && phi <= 0.99)) throw ConfigError("phi must lie in [0, 0.99]");
    if (!std::isfinite(T)) throw ConfigError("T must be finite");
    if (prim.endogenous() && !b.is_constant())
        throw ConfigError("b must be constant under endogenous search");
}

double consumption_wi(double w, double z, double phi, double T) {
    return w + phi * std::max(z - w, 0.0) - T;
}

SearchReturn search_return(double surplus, const Primitives& prim) {
    if (surplus < 0.0)
        throw SolverError("NegativeSurplus", "search_return called with negative surplus " +
                                                 fmt(surplus));
    if (surplus == 0.0) return {0.0, 0.0};
    const double lambda = std::pow(surplus / prim.kappa, 1.0 / prim.eta);
    return {-prim.search_cost(lambda) + lambda * surplus, lambda};
}

double surplus_given_acceptance(double x, double z, double phi, double r, const Distribution& F) {
    const double m1x = F.upper_partial_moment(x, 1);
    if (x >= z) return m1x / r;
    return ((1.0 - phi) * m1x + phi * F.upper_partial_moment(z, 1)) / r;
}

double exogenous_residual(double y, double z, const WIPolicy& policy, const Primitives& prim,
                          const Distribution& F) {
    const double s = surplus_given_acceptance(y, z, policy.phi, prim.r, F);
    return consumption_wi(y, z, policy) - policy.b(z) - prim.lambda_bar * s;
}

double endogenous_residual(double x, double z, const WIPolicy& policy, const Primitives& prim,
                           const Distribution& F) {
    const double s = surplus_given_acceptance(x, z, policy.phi, prim.r, F);
    return consumption_wi(x, z, policy) - policy.b(z) - search_return(s, prim).value;
}

double reservation_exogenous(double z, const WIPolicy& policy, const Primitives& prim,
                             const Distribution& F, const SolverOptions& opt) {
    if (prim.endogenous()) throw ConfigError("reservation_exogenous requires exogenous arrival");
    auto f = [&](double y) { return exogenous_residual(y, z, policy, prim, F); };
    if (f(F.lo()) >= 0.0) out_of_support(-1, F, z);
    if (f(F.hi()) <= 0.0) out_of_support(+1, F, z);
    return find_root(f, F.lo(), F.hi(), root_options(opt)).x;
}

double solve_x0(const WIPolicy& policy, const Primitives& prim, const Distribution& F,
                const SolverOptions& opt) {
    if (!prim.endogenous()) throw ConfigError("solve_x0 requires endogenous search");
    const double b = policy.b(0.0);
    auto f = [&](double x) {
        return x - policy.T - b - search_return(F.upper_partial_moment(x, 1) / prim.r, prim).value;
    };
    const double lo = b + policy.T;
    const double hi = std::max(F.hi(), lo);
    try {
        return find_root(f, lo, hi, root_options(opt)).x;
    } catch (const SolverError& e) {
        throw SolverError(e.kind(), std::string("x0: ") + e.what());
    }
}

double reservation_endogenous(double z, const WIPolicy& policy, const Primitives& prim,
                              const Distribution& F, double x0, const SolverOptions& opt) {
    if (!prim.endogenous()) throw ConfigError("reservation_endogenous requires endogenous search");
    if (z <= x0) {
        if (!(x0 > F.lo())) out_of_support(-1, F, z);
        if (!(x0 < F.hi())) out_of_support(+1, F, z);
        return x0;
    }
    auto f = [&](double x) { return endogenous_residual(x, z, policy, prim, F); };
    if (f(F.lo()) >= 0.0) out_of_support(-1, F, z);
    const double upper = std::min(z, F.hi());
    return find_root(f, F.lo(), upper, root_options(opt)).x;
}

SurplusEffort surplus_and_effort(double z, double w_res, const WIPolicy& policy,
                                 const Primitives& prim, const Distribution& F) {
    const double s = surplus_given_acceptance(w_res, z, policy.phi, prim.r, F);
    if (!prim.endogenous()) return {s, prim.lambda_bar};
    return {s, search_return(s, prim).lambda_star};
}

LemmaDerivatives active_region_slopes(double z, double w_res, double effort, double phi,
                                      const Primitives& prim, const Distribution& F) {
    const double r = prim.r;
    const double a = F.survival(w_res);
    const double b = F.survival(z);
    const double denom = r * (1.0 - phi) + effort * (1.0 - phi) * a;
    const double dw = -(effort * phi * b + r * phi) / denom;
    const double ds = (1.0 / r) * (1.0 - phi) * r * phi * (a - b) / denom;
    return {dw, ds};
}

LemmaDerivatives analytic_derivatives(double z, const WISolution& sol, const WIPolicy& policy,
                                      const Primitives& prim, const Distribution& F,
                                      const SolverOptions& opt) {
    if (!prim.endogenous() || !sol.x0)
        throw ConfigError("analytic_derivatives requires an endogenous-search solution");
    if (z <= *sol.x0)
        throw ConfigError("analytic_derivatives: z=" + fmt(z) + " lies in the pooling region (z <= x0=" +
                          fmt(*sol.x0) + "), where both slopes are zero");
    const double w = reservation_endogenous(z, policy, prim, F, *sol.x0, opt);
    const auto se = surplus_and_effort(z, w, policy, prim, F);
    return active_region_slopes(z, w, se.effort, policy.phi, prim, F);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 2) throw ConfigError("grid needs at least two points");
    std::vector<double> g(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
}

WISolution solve_wi(const WIPolicy& policy, const Primitives& prim, const Distribution& F,
                    const Distribution& H, std::size_t n_grid, const SolverOptions& opt) {
    prim.validate();
    policy.validate(prim);
    if (n_grid < 51) throw ConfigError("n_grid must be at least 51");

    WISolution sol;
    sol.mode = prim.mode;
    sol.z_grid = uniform_grid(H.lo(), H.hi(), n_grid);
    sol.w_res.resize(n_grid);
    sol.surplus.resize(n_grid);
    sol.effort.resize(n_grid);
    sol.value.resize(n_grid);

    if (prim.endogenous()) sol.x0 = solve_x0(policy, prim, F, opt);

    for (std::size_t i = 0; i < n_grid; ++i) {
        const double z = sol.z_grid[i];
        try {
            const double w = prim.endogenous()
                                 ? reservation_endogenous(z, policy, prim, F, *sol.x0, opt)
                                 : reservation_exogenous(z, policy, prim, F, opt);
            const auto se = surplus_and_effort(z, w, policy, prim, F);
            sol.w_res[i] = w;
            sol.surplus[i] = se.surplus;
            sol.effort[i] = se.effort;
            sol.value[i] = consumption_wi(w, z, policy) / prim.r;
        } catch (const SolverError& e) {
            throw e.with_z(z);
        }
    }
    if (!prim.endogenous() && policy.phi == 0.0 && policy.b.is_constant()) sol.x0 = sol.w_res.front();
    return sol;
}

}  // namespace mccall
