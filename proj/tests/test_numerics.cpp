#include <doctest.h>

#include <cmath>
#include <vector>

#include "mccall/interp.hpp"
#include "mccall/quadrature.hpp"
#include "mccall/roots.hpp"

using namespace mccall;

TEST_CASE("gauss-legendre weights sum to two and integrate polynomials exactly") {
    const auto& rule = quad::gauss_legendre_32();
    double s = 0.0;
    for (double w : rule.w) s += w;
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(quad::gl32([](double x) { return std::pow(x, 10); }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature with and without breakpoints") {
    auto kinked = [](double x) { return std::abs(x - 0.3); };
    const double exact = 0.5 * (0.09 + 0.49);
    const double at[] = {0.3};
    CHECK(std::abs(quad::integrate(kinked, 0.0, 1.0, at) - exact) < 1e-13);
    CHECK(std::abs(quad::integrate(kinked, 0.0, 1.0) - exact) < 1e-10);
    CHECK(quad::integrate([](double x) { return std::exp(x); }, 0.0, 2.0) ==
          doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-13));
    CHECK(quad::integrate([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
}

TEST_CASE("pairwise sum is order-stable on a long vector") {
    std::vector<double> v(1 << 16, 0.1);
    CHECK(quad::pairwise_sum(v) == doctest::Approx(6553.6).epsilon(1e-14));
}

TEST_CASE("find_root on a bracket") {
    auto f = [](double x) { return x * x - 2.0; };
    const auto r = find_root(f, 0.0, 2.0);
    CHECK(r.x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(find_root(f, std::sqrt(2.0), 3.0, RootOptions{1e-12, 50}).x == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("find_root reports a missing sign change") {
    try {
        find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0);
        FAIL("expected NoBracket");
    } catch (const SolverError& e) {
        CHECK(e.kind() == "NoBracket");
    }
}

TEST_CASE("monotone cubic interpolates knots and preserves monotonicity") {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{0.0, 0.1, 0.1, 2.0, 2.05};
    const MonotoneCubic m(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(m(x[i]) == doctest::Approx(y[i]));
    double prev = m(0.0);
    for (int i = 1; i <= 400; ++i) {
        const double v = m(4.0 * i / 400.0);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
    CHECK(m(1.5) == doctest::Approx(0.1));  // flat segment stays flat
    CHECK(m(-1.0) == 0.0);
    CHECK(m(9.0) == doctest::Approx(2.05));
}

TEST_CASE("monotone cubic with exact slopes reproduces a cubic") {
    std::vector<double> x, y, s;
    for (int i = 0; i <= 10; ++i) {
        const double t = 0.1 * i;
        x.push_back(t);
        y.push_back(t * t * t + t);
        s.push_back(3 * t * t + 1);
    }
    const MonotoneCubic m(x, y, s);
    for (double t : {0.05, 0.33, 0.71, 0.99}) {
        CHECK(m(t) == doctest::Approx(t * t * t + t).epsilon(1e-14));
        CHECK(m.derivative(t) == doctest::Approx(3 * t * t + 1).epsilon(1e-12));
    }
}

TEST_CASE("monotone cubic rejects unsorted knots") {
    CHECK_THROWS(MonotoneCubic({0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}));
    CHECK_THROWS(MonotoneCubic({0.0, 1.0}, {0.0}));
}
