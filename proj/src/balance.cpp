#include <cmath>
#include <sstream>

#include "mccall/errors.hpp"
#include "mccall/model.hpp"
#include "mccall/roots.hpp"
#include "mccall/welfare.hpp"

namespace mccall {

namespace {
constexpr double kBudgetTol = 1e-11;
}

TaxBalance balance_wi_tax(const WIPolicy& policy, const Primitives& prim, const Distribution& F,
                          const Distribution& H, std::size_t n_grid, const SolverOptions& opt) {
    TaxBalance out{};
    auto residual = [&](double T) {
        WIPolicy p = policy;
        p.T = T;
        const auto sol = solve_wi(p, prim, F, H, n_grid, opt);
        const double res = budget_residual(wi_economy(sol, p), prim, F, H, opt.quad_tol);
        out.trace.emplace_back(T, res);
        return res;
    };
    // Residual at T, or NaN when the economy cannot be solved there.
    auto try_residual = [&](double T) {
        try {
            return residual(T);
        } catch (const SolverError&) {
            out.trace.emplace_back(T, std::nan(""));
            return std::nan("");
        }
    };

    const double limit = F.hi();
    double r0 = try_residual(0.0);
    if (r0 == 0.0) return {0.0, 0.0, out.trace};

    // Expand outward from T = 0 on both sides, keeping the innermost solvable
    // point on each side, until the residual changes sign.
    double inner[2] = {0.0, 0.0};
    double inner_res[2] = {r0, r0};
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (double step = limit / 512.0; step <= limit * (1.0 + 1e-12) && !found; step *= 2.0) {
        for (int side = 0; side < 2 && !found; ++side) {
            const double T = side == 0 ? step : -step;
            const double res = try_residual(T);
            if (std::isnan(res)) continue;
            if (!std::isnan(inner_res[side]) && (res < 0) != (inner_res[side] < 0)) {
                lo = std::min(T, inner[side]);
                hi = std::max(T, inner[side]);
                found = true;
            }
            inner[side] = T;
            inner_res[side] = res;
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "no budget-balancing tax found in [" << -limit << ", " << limit << "]; trace:";
        for (auto [T, res] : out.trace) msg << " (" << T << ", " << res << ")";
        throw SolverError("NoBracket", msg.str());
    }
    const auto root = find_root(residual, lo, hi, RootOptions{kBudgetTol, opt.max_iter});
    out.T = root.x;
    out.residual = root.residual;
    return out;
}

}  // namespace mccall
