#pragma once

#include <span>
#include <string>

#include "mccall/quadrature.hpp"

namespace mccall {

enum class Family { Uniform, TruncatedLogNormal, ScaledBeta };

std::string to_string(Family f);

// Family-specific parameters. Unused fields are ignored by the family.
struct DistributionParams {
    Family family = Family::Uniform;
    double lo = 0.0;
    double hi = 1.0;
    double mu = 0.0;     // log-normal location
    double sigma = 1.0;  // log-normal scale
    double alpha = 1.0;  // beta shape
    double beta = 1.0;   // beta shape
};

struct CdfPdf {
    double cdf;
    double pdf;
};

// A wage distribution on a bounded support [lo, hi]. Immutable after
// construction; parameters are validated in the constructor.
class Distribution {
public:
    explicit Distribution(const DistributionParams& p);

    static Distribution uniform(double lo, double hi);
    static Distribution truncated_lognormal(double mu, double sigma, double lo, double hi);
    static Distribution scaled_beta(double alpha, double beta, double lo, double hi);

    const DistributionParams& params() const { return p_; }
    Family family() const { return p_.family; }
    double lo() const { return p_.lo; }
    double hi() const { return p_.hi; }

    CdfPdf eval(double w) const;
    double cdf(double w) const { return eval(w).cdf; }
    double pdf(double w) const;
    // 1 - F(w), computed without cancellation in the upper tail.
    double survival(double w) const;

    // Integral over [x, hi] of (w - x)^k dF(w) for k in {0, 1, 2}.
    double upper_partial_moment(double x, int k) const;

    // Integral over [x, hi] of h(w) dF(w) by adaptive Gauss-Legendre.
    // `kinks` lists points where h is not smooth; no panel straddles one.
    template <class H>
    double upper_integral(double x, const H& h, std::span<const double> kinks = {},
                          double abs_tol = 1e-10) const {
        const double a = x > p_.lo ? x : p_.lo;
        if (a >= p_.hi) return 0.0;
        auto integrand = [&](double w) { return h(w) * pdf(w); };
        return quad::integrate(integrand, a, p_.hi, kinks, quad::AdaptiveOptions{abs_tol});
    }

    // Inverse CDF; u is clamped to [0, 1].
    double sample(double u) const;

    double mean() const { return upper_partial_moment(p_.lo, 1) + p_.lo; }

private:
    // Integral over [max(x, lo), hi] of w^j dF for j = 0..2.
    double upper_raw_moment(double x, int j) const;

    DistributionParams p_;
    double norm_ = 1.0;  // truncation mass (log-normal) or beta function value
    double a_std_ = 0.0, b_std_ = 0.0;  // standardized log-normal truncation points
};

}  // namespace mccall
