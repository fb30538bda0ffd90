#include <doctest.h>

#include <cmath>

#include "mccall/errors.hpp"
#include "mccall/model.hpp"
#include "mccall/welfare.hpp"

using namespace mccall;

namespace {

Primitives exogenous(double r, double lambda_bar) {
    Primitives p;
    p.r = r;
    p.mode = SearchMode::ExogenousArrival;
    p.lambda_bar = lambda_bar;
    return p;
}

Primitives endogenous(double r, double kappa = 1.0, double eta = 1.0) {
    Primitives p;
    p.r = r;
    p.mode = SearchMode::EndogenousSearch;
    p.kappa = kappa;
    p.eta = eta;
    return p;
}

WIPolicy make_policy(double b, double T, double phi) {
    WIPolicy p;
    p.b = BenefitSchedule::constant(b);
    p.T = T;
    p.phi = phi;
    return p;
}

// Plain bisection, kept separate from the library's root finder.
template <class F>
double bisect(F f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

const Distribution kLogNormal = Distribution::truncated_lognormal(0.0, 0.5, 0.2, 5.0);
const Distribution kPrior = Distribution::uniform(0.5, 3.0);

}  // namespace

TEST_CASE("consumption with wage insurance") {
    CHECK(consumption_wi(2.0, 3.0, 0.5, 0.1) == doctest::Approx(2.4));
    CHECK(consumption_wi(4.0, 3.0, 0.5, 0.1) == doctest::Approx(3.9));
    CHECK(consumption_wi(2.0, 3.0, 0.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("search return for the power cost") {
    auto p = endogenous(0.05);
    auto s = search_return(2.0, p);
    CHECK(s.lambda_star == doctest::Approx(2.0));
    CHECK(s.value == doctest::Approx(2.0));
    s = search_return(0.0, p);
    CHECK(s.lambda_star == 0.0);
    CHECK(s.value == 0.0);
    p.kappa = 2.0;
    s = search_return(2.0, p);
    CHECK(s.lambda_star == doctest::Approx(1.0));
    CHECK(s.value == doctest::Approx(1.0));
    p.eta = 0.5;
    // R maximizes -psi(l) + l S; check against a dense scan.
    s = search_return(1.3, p);
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double l = 1e-5 * i;
        best = std::max(best, -p.search_cost(l) + l * 1.3);
    }
    CHECK(s.value == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("exogenous reservation wage examples") {
    const auto U = Distribution::uniform(0.0, 1.0);
    // No arrivals: y = b + T.
    CHECK(reservation_exogenous(0.3, make_policy(0.4, 0.1, 0.0), exogenous(0.05, 0.0), U) ==
          doctest::Approx(0.5).epsilon(1e-12));
    // Insurance branch with no arrivals: (b - phi z) / (1 - phi).
    CHECK(reservation_exogenous(0.6, make_policy(0.4, 0.0, 0.5), exogenous(0.05, 0.0), U) ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(reservation_exogenous(2.0, make_policy(0.4, 0.0, 0.5), exogenous(0.05, 0.0), U),
                    SolverError);
    // y = (1 - y)^2 / 2 with r = lambda = 1.
    const double w = reservation_exogenous(0.5, make_policy(0.0, 0.0, 0.0), exogenous(1.0, 1.0), U);
    CHECK(std::abs(w - (2.0 - std::sqrt(3.0))) < 1e-12);
    CHECK(std::abs(w - bisect([](double y) { return y - (1 - y) * (1 - y) / 2; }, 0.0, 1.0)) < 1e-12);
}

TEST_CASE("pooling threshold") {
    const auto U = Distribution::uniform(0.0, 1.0);
    const auto p = endogenous(1.0);
    const double x0 = solve_x0(make_policy(0.0, 0.0, 0.5), p, U);
    const double oracle = bisect([](double x) { return x - std::pow(1 - x, 4) / 8; }, 0.0, 1.0);
    CHECK(std::abs(x0 - oracle) < 1e-12);
    CHECK(x0 == doctest::Approx(0.0869).epsilon(1e-3));
    CHECK(solve_x0(make_policy(0.0, 0.0, 0.0), p, U) == solve_x0(make_policy(0.0, 0.0, 0.7), p, U));
    CHECK(solve_x0(make_policy(1.2, 0.1, 0.0), p, U) >= U.hi());
}

TEST_CASE("endogenous reservation wage: pooling and active branches") {
    const auto U = Distribution::uniform(0.0, 1.0);
    const auto p = endogenous(1.0);
    const auto pol = make_policy(0.0, 0.0, 0.5);
    const double x0 = solve_x0(pol, p, U);
    CHECK(reservation_endogenous(x0 - 0.1 * x0, pol, p, U, x0) == x0);
    CHECK(reservation_endogenous(x0, pol, p, U, x0) == x0);

    // Indifference (1-phi) x + phi z = R(S(x)), S(x) = [(1-phi)(1-x)^2 + phi(1-z)^2] / 2.
    // At z = 0.5 the floor phi z already exceeds x0 and the root leaves the support.
    const double z = 0.15, phi = 0.5;
    auto omega = [&](double x) {
        const double s = ((1 - phi) * (1 - x) * (1 - x) + phi * (1 - z) * (1 - z)) / 2;
        return (1 - phi) * x + phi * z - s * s / 2;
    };
    int changes = 0;
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double a = z * i / 10000.0, b = z * (i + 1) / 10000.0;
        if ((omega(a) < 0) != (omega(b) < 0)) {
            ++changes;
            lo = a;
            hi = b;
        }
    }
    REQUIRE(changes == 1);
    const double w = reservation_endogenous(z, pol, p, U, x0);
    CHECK(std::abs(w - bisect(omega, lo, hi)) < 1e-12);
    CHECK(w < x0);
    CHECK(w > 0.0);
}

TEST_CASE("surplus and effort") {
    const auto U = Distribution::uniform(0.0, 1.0);
    const auto p = endogenous(1.0);
    auto se = surplus_and_effort(0.3, 0.5, make_policy(0.0, 0.0, 0.0), p, U);
    CHECK(se.surplus == doctest::Approx(0.125));
    CHECK(se.effort == doctest::Approx(0.125));
    se = surplus_and_effort(0.3, 1.0, make_policy(0.0, 0.0, 0.5), p, U);
    CHECK(se.surplus == 0.0);
    CHECK(se.effort == 0.0);
    // Insurance does not bind when z <= w_res.
    const auto pol = make_policy(0.0, 0.0, 0.5);
    const double x0 = solve_x0(pol, p, U);
    CHECK(surplus_and_effort(0.5 * x0, x0, pol, p, U).surplus ==
          doctest::Approx(surplus_and_effort(0.5 * x0, x0, make_policy(0.0, 0.0, 0.0), p, U).surplus)
              .epsilon(1e-15));
}

TEST_CASE("analytic slopes") {
    const auto p = endogenous(0.05);
    CHECK(active_region_slopes(1.0, 0.8, 2.0, 0.0, p, kLogNormal).dw_res == 0.0);
    CHECK(active_region_slopes(1.0, 0.8, 2.0, 0.0, p, kLogNormal).dsurplus == 0.0);
    // At the top of the offer support B = 0.
    const double a = kLogNormal.survival(0.8);
    const double expect = -p.r * 0.5 / (p.r * 0.5 + 2.0 * 0.5 * a);
    CHECK(active_region_slopes(kLogNormal.hi(), 0.8, 2.0, 0.5, p, kLogNormal).dw_res ==
          doctest::Approx(expect));
}

TEST_CASE("analytic slopes match finite differences mid-grid") {
    const auto p = endogenous(0.05);
    auto pol = make_policy(0.4, 0.0, 0.5);
    pol.T = balance_wi_tax(pol, p, kLogNormal, kPrior, 101).T;
    const auto sol = solve_wi(pol, p, kLogNormal, kPrior, 101);
    REQUIRE(sol.x0);
    CHECK_THROWS_AS(analytic_derivatives(*sol.x0 - 0.01, sol, pol, p, kLogNormal), ConfigError);
    for (double z : {2.0, 2.4, 2.8}) {
        REQUIRE(z > *sol.x0);
        const auto d = analytic_derivatives(z, sol, pol, p, kLogNormal);
        const double h = 1e-4 * z;
        const double wp = reservation_endogenous(z + h, pol, p, kLogNormal, *sol.x0);
        const double wm = reservation_endogenous(z - h, pol, p, kLogNormal, *sol.x0);
        const double sp = surplus_and_effort(z + h, wp, pol, p, kLogNormal).surplus;
        const double sm = surplus_and_effort(z - h, wm, pol, p, kLogNormal).surplus;
        CHECK(std::abs((wp - wm) / (2 * h) / d.dw_res - 1) < 1e-4);
        CHECK(std::abs((sp - sm) / (2 * h) / d.dsurplus - 1) < 1e-4);
        CHECK(d.dw_res < 0.0);
        CHECK(d.dsurplus > 0.0);
    }
}

TEST_CASE("solve_wi tables") {
    SUBCASE("no insurance pools every type") {
        const auto p = endogenous(0.05);
        const auto pol = make_policy(0.4, 0.2, 0.0);
        const auto sol = solve_wi(pol, p, kLogNormal, kPrior, 51);
        REQUIRE(sol.x0);
        for (double w : sol.w_res) CHECK(std::abs(w - *sol.x0) < 1e-12);
    }
    SUBCASE("reservation wages are non-increasing with insurance") {
        const auto p = endogenous(0.05);
        const auto pol = make_policy(0.4, 0.2, 0.5);
        const auto sol = solve_wi(pol, p, kLogNormal, kPrior, 101);
        for (std::size_t i = 1; i < sol.size(); ++i) CHECK(sol.w_res[i] <= sol.w_res[i - 1]);
    }
    SUBCASE("value equals capitalized consumption at the reservation wage") {
        for (bool endo : {false, true}) {
            const auto p = endo ? endogenous(0.05) : exogenous(0.05, 0.8);
            const auto pol = make_policy(0.4, 0.2, 0.5);
            const auto sol = solve_wi(pol, p, kLogNormal, kPrior, 51);
            for (std::size_t i = 0; i < sol.size(); ++i)
                CHECK(sol.value[i] ==
                      doctest::Approx(consumption_wi(sol.w_res[i], sol.z_grid[i], pol) / p.r).epsilon(1e-13));
        }
    }
}

TEST_CASE("policy validation") {
    CHECK_THROWS_WITH_AS(make_policy(0.4, 0.0, 1.0).validate(exogenous(0.05, 0.8)),
                         "phi must lie in [0, 0.99]", ConfigError);
    WIPolicy pol = make_policy(0.4, 0.0, 0.5);
    pol.b = BenefitSchedule::affine(0.3, 0.05);
    CHECK_NOTHROW(pol.validate(exogenous(0.05, 0.8)));
    CHECK_THROWS_AS(pol.validate(endogenous(0.05)), ConfigError);
    CHECK_THROWS_AS(exogenous(0.05, 0.0).validate(), ConfigError);
    auto bad = endogenous(0.05);
    bad.lambda_bar = 0.3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("balancing the WI tax") {
    const auto p = exogenous(0.05, 0.8);
    CHECK(std::abs(balance_wi_tax(make_policy(0.0, 0.0, 0.0), p, kLogNormal, kPrior, 51).T) < 1e-12);
    CHECK(balance_wi_tax(make_policy(0.4, 0.0, 0.0), p, kLogNormal, kPrior, 51).T > 0.0);

    // Independent oracle: scan the residual over T for a sign change, then bisect.
    auto pol = make_policy(0.4, 0.0, 0.5);
    auto residual = [&](double T) {
        auto q = pol;
        q.T = T;
        const auto sol = solve_wi(q, p, kLogNormal, kPrior, 51);
        return budget_residual(wi_economy(sol, q), p, kLogNormal, kPrior);
    };
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (int i = 0; i < 40 && !found; ++i) {
        const double a = 0.025 * i, b = 0.025 * (i + 1);
        if ((residual(a) < 0) != (residual(b) < 0)) {
            lo = a;
            hi = b;
            found = true;
        }
    }
    REQUIRE(found);
    const double T = balance_wi_tax(pol, p, kLogNormal, kPrior, 51).T;
    CHECK(std::abs(T - bisect(residual, lo, hi)) < 1e-9);
}
