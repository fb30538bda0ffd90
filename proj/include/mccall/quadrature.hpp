#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "mccall/errors.hpp"

namespace mccall::quad {

inline constexpr int kNodes = 32;

struct GaussLegendreRule {
    std::array<double, kNodes> x{};
    std::array<double, kNodes> w{};
};

// Nodes and weights on [-1, 1] by Newton iteration on the Legendre recurrence.
inline const GaussLegendreRule& gauss_legendre_32() {
    static const GaussLegendreRule rule = [] {
        GaussLegendreRule r;
        constexpr int n = kNodes;
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p1 / pp;
                if (std::abs(z - z1) < 1e-15) break;
            }
            r.x[i] = -z;
            r.x[n - 1 - i] = z;
            r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
        return r;
    }();
    return rule;
}

// Single 32-point panel on [a, b].
template <class F>
double gl32(const F& f, double a, double b) {
    const auto& rule = gauss_legendre_32();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int i = 0; i < kNodes; ++i) sum += rule.w[i] * f(mid + half * rule.x[i]);
    return sum * half;
}

struct AdaptiveOptions {
    double abs_tol = 1e-10;
    int max_panels = 20000;
};

// Adaptive panel Gauss-Legendre on [a, b]. Panels are first split at every
// breakpoint strictly inside (a, b), so no panel straddles a declared kink.
// A panel is accepted when its 32-point estimate agrees with the sum over its
// two halves within its share of the tolerance (proportional to width).
template <class F>
double integrate(const F& f, double a, double b, std::span<const double> breakpoints = {},
                 const AdaptiveOptions& opt = {}) {
    if (!(b > a)) return 0.0;

    std::vector<double> cuts{a};
    for (double k : breakpoints)
        if (k > a && k < b) cuts.push_back(k);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double width = b - a;
    struct Panel {
        double lo, hi, whole;
    };
    std::vector<Panel> stack;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        stack.push_back({cuts[i], cuts[i + 1], gl32(f, cuts[i], cuts[i + 1])});

    double total = 0.0;
    double unresolved = 0.0;
    int panels = static_cast<int>(stack.size());
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.lo + p.hi);
        const double left = gl32(f, p.lo, mid);
        const double right = gl32(f, mid, p.hi);
        const double err = std::abs(left + right - p.whole);
        const double share = opt.abs_tol * (p.hi - p.lo) / width;
        // Stop refining once the panel cannot be split in floating point.
        if (err <= share || mid <= p.lo || mid >= p.hi || (p.hi - p.lo) < 1e-14 * width) {
            total += left + right;
            if (err > share) unresolved += err;
            continue;
        }
        panels += 2;
        if (panels > opt.max_panels)
            throw SolverError("QuadratureNonConvergence",
                              "adaptive quadrature exceeded max panels; residual estimate " +
                                  std::to_string(err + unresolved));
        stack.push_back({p.lo, mid, left});
        stack.push_back({mid, p.hi, right});
    }
    if (unresolved > opt.abs_tol)
        throw SolverError("QuadratureNonConvergence",
                          "adaptive quadrature did not converge; residual estimate " +
                              std::to_string(unresolved));
    return total;
}

// Pairwise summation; keeps reductions independent of evaluation order.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

}  // namespace mccall::quad
