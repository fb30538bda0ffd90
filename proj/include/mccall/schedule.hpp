#pragma once

#include <vector>

#include "mccall/dist.hpp"
#include "mccall/interp.hpp"

namespace mccall {

// Strictly increasing consumption schedule q(w) of the replicating UI-only
// economy, in three pieces:
//   w >= x0          q(x0) + c (w - x0)^2
//   w_min <= w < x0  Hermite cubic through the integrated active-region knots
//   w < w_min        linear with the slope at w_min, or a mirrored quadratic
//                    when that slope is zero (no active region)
// Tail integrals against F are precomputed panel by panel so that
// tail_mass(y) costs a single 32-point panel.
class ConsumptionSchedule {
public:
    // `active` holds q(w) - q(x0) and must end at the knot (x0, 0).
    ConsumptionSchedule(MonotoneCubic active, double x0, double q_x0, double c,
                        const Distribution& F);

    double operator()(double w) const;
    double derivative(double w) const;

    // Integral over [y, hi_F] of q(w) dF(w).
    double tail_mass(double y) const;
    // Capitalized surplus at acceptance wage y: (1/r) integral of (q(w) - q(y)) dF over [y, hi_F].
    double surplus(double y, double r) const;
    // q(w) - q(x0), without rounding at the level of q.
    double excess(double w) const;
    double surplus_at_x0(double r) const;
    // surplus(y, r) - surplus_at_x0(r), accurate to rounding of the difference itself.
    double surplus_shift(double y, double r) const;

    double x0() const { return x0_; }
    double q_x0() const { return q_x0_; }
    double curvature() const { return c_; }
    double w_min() const { return w_min_; }
    double below_slope() const { return below_slope_; }
    const MonotoneCubic& active() const { return active_; }
    const Distribution& offer_dist() const { return F_; }
    // Knot locations of the active piece followed by x0 (increasing).
    std::vector<double> knots() const;

private:
    double excess_tail(double y) const;
    double panel_integral(double a, double b) const;

    MonotoneCubic active_;
    double x0_, q_x0_, c_;
    double w_min_, ex_min_, below_slope_;
    Distribution F_;
    std::vector<double> cuts_;    // panel boundaries over [lo_F, hi_F]
    std::vector<double> suffix_;  // suffix_[i] = integral of q - q(x0) over [cuts_[i], hi_F]
};

}  // namespace mccall
