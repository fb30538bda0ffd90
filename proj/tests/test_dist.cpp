#include <doctest.h>

#include <cmath>
#include <random>

#include "mccall/dist.hpp"
#include "mccall/errors.hpp"

using namespace mccall;

namespace {

Distribution lognormal() { return Distribution::truncated_lognormal(0.0, 0.5, 0.2, 5.0); }

std::vector<Distribution> families() {
    return {Distribution::uniform(0.0, 1.0), lognormal(), Distribution::scaled_beta(2.0, 3.5, 0.5, 4.0)};
}

}  // namespace

TEST_CASE("uniform eval inside and outside the support") {
    const auto d = Distribution::uniform(0.0, 1.0);
    CHECK(d.eval(0.25).cdf == doctest::Approx(0.25));
    CHECK(d.eval(0.25).pdf == doctest::Approx(1.0));
    CHECK(d.eval(-1.0).cdf == 0.0);
    CHECK(d.eval(-1.0).pdf == 0.0);
    CHECK(d.eval(2.0).cdf == 1.0);
    CHECK(d.eval(2.0).pdf == 0.0);
}

TEST_CASE("truncated lognormal cdf agrees with rejection sampling") {
    const auto d = lognormal();
    std::mt19937_64 gen(7);
    std::lognormal_distribution<double> base(0.0, 0.5);
    const int n = 1000000;
    int kept = 0, below = 0;
    while (kept < n) {
        const double w = base(gen);
        if (w < 0.2 || w > 5.0) continue;
        ++kept;
        below += w <= 1.0;
    }
    const double p = static_cast<double>(below) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(d.cdf(1.0) - p) < 4 * se);
}

TEST_CASE("cdf endpoints and pdf normalization") {
    for (const auto& d : families()) {
        CHECK(d.cdf(d.lo()) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(d.cdf(d.hi()) == doctest::Approx(1.0).epsilon(1e-15));
        const double mass = d.upper_integral(d.lo(), [](double) { return 1.0; });
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("upper partial moments of the uniform") {
    const auto d = Distribution::uniform(0.0, 1.0);
    CHECK(d.upper_partial_moment(0.5, 0) == doctest::Approx(0.5));
    CHECK(d.upper_partial_moment(0.5, 1) == doctest::Approx(0.125));
    CHECK(d.upper_partial_moment(0.5, 2) == doctest::Approx(1.0 / 24.0));
    CHECK(d.upper_partial_moment(1.2, 1) == 0.0);
    CHECK(d.upper_partial_moment(-1.0, 1) == doctest::Approx(1.5));
}

TEST_CASE("closed-form moments match quadrature at random points") {
    std::mt19937_64 gen(11);
    for (const auto& d : families()) {
        std::uniform_real_distribution<double> pick(d.lo(), d.hi());
        for (int i = 0; i < 20; ++i) {
            const double x = pick(gen);
            for (int k = 0; k <= 2; ++k) {
                const double q = d.upper_integral(x, [&](double w) { return std::pow(w - x, k); });
                CHECK(std::abs(d.upper_partial_moment(x, k) - q) < 1e-9);
            }
        }
    }
}

TEST_CASE("upper partial moments are non-increasing in x") {
    for (const auto& d : families()) {
        for (int k = 0; k <= 2; ++k) {
            double prev = d.upper_partial_moment(d.lo() - 0.1, k);
            for (int i = 0; i <= 200; ++i) {
                const double x = d.lo() + (d.hi() - d.lo()) * i / 200.0;
                const double m = d.upper_partial_moment(x, k);
                CHECK(m <= prev + 1e-15);
                prev = m;
            }
            CHECK(d.upper_partial_moment(d.hi(), k) == doctest::Approx(0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("upper_integral examples with a declared kink") {
    const auto d = Distribution::uniform(0.0, 1.0);
    CHECK(d.upper_integral(0.0, [](double w) { return w; }) == doctest::Approx(0.5));
    const double kink[] = {0.5};
    CHECK(d.upper_integral(0.0, [](double w) { return std::max(0.5 - w, 0.0); }, kink) ==
          doctest::Approx(0.125).epsilon(1e-12));
    CHECK(d.upper_integral(0.25, [](double) { return 1.0; }) == doctest::Approx(0.75));
}

TEST_CASE("sampling: quantiles and round trip") {
    CHECK(Distribution::uniform(2.0, 4.0).sample(0.5) == doctest::Approx(3.0));
    for (const auto& d : families()) {
        CHECK(d.sample(0.0) == doctest::Approx(d.lo()));
        CHECK(d.sample(1.0) == doctest::Approx(d.hi()));
        double prev = d.lo();
        for (int i = 0; i <= 100; ++i) {
            const double u = i / 100.0;
            const double w = d.sample(u);
            CHECK(w >= prev);
            CHECK(w >= d.lo());
            CHECK(w <= d.hi());
            CHECK(std::abs(d.cdf(w) - u) < 1e-9);
            prev = w;
        }
    }
    CHECK(std::abs(lognormal().cdf(lognormal().sample(0.5)) - 0.5) < 1e-10);
}

TEST_CASE("invalid parameters are rejected at construction") {
    CHECK_THROWS_AS(Distribution::uniform(1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(Distribution::truncated_lognormal(0.0, -1.0, 0.2, 5.0), ConfigError);
    CHECK_THROWS_AS(Distribution::truncated_lognormal(0.0, 0.5, -0.2, 5.0), ConfigError);
    CHECK_THROWS_AS(Distribution::scaled_beta(0.0, 1.0, 0.0, 1.0), ConfigError);
}
