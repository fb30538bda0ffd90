#include "mccall/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "mccall/errors.hpp"
#include "mccall/quadrature.hpp"

namespace mccall {

namespace {
constexpr int kExtensionPanels = 64;
constexpr int kBelowPanels = 16;
}  // namespace

ConsumptionSchedule::ConsumptionSchedule(MonotoneCubic active, double x0, double q_x0, double c,
                                         const Distribution& F)
    : active_(std::move(active)), x0_(x0), q_x0_(q_x0), c_(c), F_(F) {
    if (!(c_ > 0.0)) throw SolverError("InvalidSchedule", "extension curvature must be positive");
    if (active_.empty()) {
        w_min_ = x0_;
        ex_min_ = 0.0;
        below_slope_ = 0.0;
    } else {
        if (active_.x().back() != x0_ || active_.y().back() != 0.0)
            throw SolverError("InvalidSchedule", "active piece must end at (x0, 0)");
        w_min_ = active_.x().front();
        ex_min_ = active_.y().front();
        below_slope_ = active_.slopes().front();
    }

    const double lo = F_.lo(), hi = F_.hi();
    cuts_.push_back(lo);
    auto add_uniform = [&](double a, double b, int n) {
        a = std::max(a, lo);
        b = std::min(b, hi);
        if (!(b > a)) return;
        for (int i = 1; i <= n; ++i) cuts_.push_back(a + (b - a) * i / n);
    };
    add_uniform(lo, w_min_, kBelowPanels);
    for (double k : active_.x())
        if (k > lo && k < hi) cuts_.push_back(k);
    if (x0_ > lo && x0_ < hi) cuts_.push_back(x0_);
    add_uniform(x0_, hi, kExtensionPanels);
    cuts_.push_back(hi);
    std::sort(cuts_.begin(), cuts_.end());
    cuts_.erase(std::unique(cuts_.begin(), cuts_.end()), cuts_.end());

    suffix_.assign(cuts_.size(), 0.0);
    for (std::size_t i = cuts_.size() - 1; i-- > 0;)
        suffix_[i] = suffix_[i + 1] + panel_integral(cuts_[i], cuts_[i + 1]);
}

double ConsumptionSchedule::operator()(double w) const { return q_x0_ + excess(w); }

double ConsumptionSchedule::derivative(double w) const {
    if (w >= x0_) return 2.0 * c_ * (w - x0_);
    if (w >= w_min_) return active_.derivative(w);
    if (below_slope_ > 0.0) return below_slope_;
    return -2.0 * c_ * (w - w_min_);
}

double ConsumptionSchedule::excess(double w) const {
    if (w >= x0_) return c_ * (w - x0_) * (w - x0_);
    if (w >= w_min_) return active_(w);
    if (below_slope_ > 0.0) return ex_min_ + below_slope_ * (w - w_min_);
    return ex_min_ - c_ * (w - w_min_) * (w - w_min_);
}

double ConsumptionSchedule::panel_integral(double a, double b) const {
    return quad::gl32([&](double w) { return excess(w) * F_.pdf(w); }, a, b);
}

double ConsumptionSchedule::excess_tail(double y) const {
    if (y <= cuts_.front()) return suffix_.front();
    if (y >= cuts_.back()) return 0.0;
    auto it = std::upper_bound(cuts_.begin(), cuts_.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - cuts_.begin());  // cuts_[k-1] <= y < cuts_[k]
    return panel_integral(y, cuts_[k]) + suffix_[k];
}

double ConsumptionSchedule::tail_mass(double y) const {
    return excess_tail(y) + q_x0_ * F_.survival(y);
}

double ConsumptionSchedule::surplus_at_x0(double r) const { return excess_tail(x0_) / r; }

double ConsumptionSchedule::surplus_shift(double y, double r) const {
    // Oriented integral of the excess over [y, x0]. Next to x0 it is integrated
    // directly; further out the suffix difference is already large.
    const auto k0 = std::lower_bound(cuts_.begin(), cuts_.end(), x0_);
    const double left = k0 == cuts_.begin() ? x0_ : *std::prev(k0);
    const double right = std::next(k0) == cuts_.end() ? x0_ : *std::next(k0);
    double below;
    if (k0 != cuts_.end() && *k0 == x0_ && y >= left && y <= right)
        below = y < x0_ ? panel_integral(y, x0_) : -panel_integral(x0_, y);
    else
        below = excess_tail(y) - excess_tail(x0_);
    return (below - excess(y) * F_.survival(y)) / r;
}

// Measured from q(x0) so that nothing of order q cancels near the junction.
double ConsumptionSchedule::surplus(double y, double r) const {
    return (excess_tail(y) - excess(y) * F_.survival(y)) / r;
}

std::vector<double> ConsumptionSchedule::knots() const {
    std::vector<double> k(active_.x().begin(), active_.x().end());
    if (k.empty()) k.push_back(x0_);
    return k;
}

}  // namespace mccall
