#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "mccall/errors.hpp"

namespace mccall {

struct RootOptions {
    double residual_tol = 1e-12;
    std::uintmax_t max_iter = 200;
};

struct RootResult {
    double x;
    double residual;
    std::uintmax_t iterations;
};

// Bracketed root of a continuous scalar function on [a, b]. Requires a sign
// change (or a zero endpoint). Iterates TOMS 748 (bracketing interpolation
// safeguarded by bisection) until |f| < residual_tol or the bracket collapses
// to a few ulps.
template <class F>
RootResult find_root(const F& f, double a, double b, const RootOptions& opt = {}) {
    double fa = f(a);
    double fb = f(b);
    if (std::abs(fa) <= opt.residual_tol) return {a, fa, 0};
    if (std::abs(fb) <= opt.residual_tol) return {b, fb, 0};
    if ((fa < 0) == (fb < 0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "no sign change on [" << a << ", " << b << "]: f(a)=" << fa << ", f(b)=" << fb;
        throw SolverError("NoBracket", msg.str());
    }

    double best_x = std::abs(fa) < std::abs(fb) ? a : b;
    double best_f = std::abs(fa) < std::abs(fb) ? fa : fb;
    bool hit = false;
    auto tracked = [&](double x) {
        const double v = f(x);
        if (std::abs(v) < std::abs(best_f)) {
            best_x = x;
            best_f = v;
        }
        if (std::abs(v) <= opt.residual_tol) hit = true;
        return v;
    };
    auto done = [&](double lo, double hi) {
        const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
        return hit || std::abs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * scale;
    };

    std::uintmax_t iters = opt.max_iter;
    auto bracket = boost::math::tools::toms748_solve(tracked, a, b, fa, fb, done, iters);
    // A collapsed bracket counts as converged even if rounding keeps |f| above tol.
    const bool collapsed =
        std::abs(bracket.second - bracket.first) <=
        4.0 * std::numeric_limits<double>::epsilon() *
            std::max({std::abs(bracket.first), std::abs(bracket.second), 1e-300});
    if (!hit && !collapsed) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "root finder did not converge in " << iters << " iterations; best residual "
            << best_f << " at " << best_x;
        throw SolverError("NonConvergence", msg.str());
    }
    return {best_x, best_f, iters};
}

}  // namespace mccall
