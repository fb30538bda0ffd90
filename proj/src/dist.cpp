#include "mccall/dist.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "mccall/errors.hpp"

namespace mccall {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double norm_sf(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// Phi(b) - Phi(a) without losing digits in either tail.
double norm_mass(double a, double b) {
    if (b <= a) return 0.0;
    if (a >= 0.0) return norm_sf(a) - norm_sf(b);
    if (b <= 0.0) return norm_cdf(b) - norm_cdf(a);
    return 1.0 - norm_cdf(a) - norm_sf(b);
}

double binom(int k, int i) {
    static constexpr double table[3][3] = {{1, 0, 0}, {1, 1, 0}, {1, 2, 1}};
    return table[k][i];
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::Uniform: return "uniform";
        case Family::TruncatedLogNormal: return "truncated_lognormal";
        case Family::ScaledBeta: return "scaled_beta";
    }
    return "unknown";
}

Distribution::Distribution(const DistributionParams& p) : p_(p) {
    if (!std::isfinite(p_.lo) || !std::isfinite(p_.hi) || !(p_.lo < p_.hi))
        throw ConfigError("distribution support must satisfy lo < hi with both finite");
    switch (p_.family) {
        case Family::Uniform: break;
        case Family::TruncatedLogNormal: {
            if (!(p_.sigma > 0.0) || !std::isfinite(p_.mu))
                throw ConfigError("truncated_lognormal requires sigma > 0 and finite mu");
            if (!(p_.lo > 0.0)) throw ConfigError("truncated_lognormal requires lo > 0");
            a_std_ = (std::log(p_.lo) - p_.mu) / p_.sigma;
            b_std_ = (std::log(p_.hi) - p_.mu) / p_.sigma;
            norm_ = norm_mass(a_std_, b_std_);
            if (!(norm_ > 0.0)) throw ConfigError("truncated_lognormal window carries no mass");
            break;
        }
        case Family::ScaledBeta: {
            if (!(p_.alpha >= 1.0) || !(p_.beta >= 1.0))
                throw ConfigError("scaled_beta requires alpha >= 1 and beta >= 1 (bounded density)");
            norm_ = boost::math::beta(p_.alpha, p_.beta);
            break;
        }
    }
}

Distribution Distribution::uniform(double lo, double hi) {
    return Distribution({Family::Uniform, lo, hi});
}

Distribution Distribution::truncated_lognormal(double mu, double sigma, double lo, double hi) {
    DistributionParams p{Family::TruncatedLogNormal, lo, hi};
    p.mu = mu;
    p.sigma = sigma;
    return Distribution(p);
}

Distribution Distribution::scaled_beta(double alpha, double beta, double lo, double hi) {
    DistributionParams p{Family::ScaledBeta, lo, hi};
    p.alpha = alpha;
    p.beta = beta;
    return Distribution(p);
}

double Distribution::pdf(double w) const {
    if (w < p_.lo || w > p_.hi) return 0.0;
    const double width = p_.hi - p_.lo;
    switch (p_.family) {
        case Family::Uniform: return 1.0 / width;
        case Family::TruncatedLogNormal: {
            const double z = (std::log(w) - p_.mu) / p_.sigma;
            return std::exp(-0.5 * z * z) / (w * p_.sigma * 2.5066282746310002 * norm_);
        }
        case Family::ScaledBeta: {
            const double t = (w - p_.lo) / width;
            return boost::math::ibeta_derivative(p_.alpha, p_.beta, t) / width;
        }
    }
    return 0.0;
}

double Distribution::survival(double w) const {
    if (w <= p_.lo) return 1.0;
    if (w >= p_.hi) return 0.0;
    switch (p_.family) {
        case Family::Uniform: return (p_.hi - w) / (p_.hi - p_.lo);
        case Family::TruncatedLogNormal:
            return norm_mass((std::log(w) - p_.mu) / p_.sigma, b_std_) / norm_;
        case Family::ScaledBeta:
            return boost::math::ibetac(p_.alpha, p_.beta, (w - p_.lo) / (p_.hi - p_.lo));
    }
    return 0.0;
}

CdfPdf Distribution::eval(double w) const {
    if (w <= p_.lo) return {0.0, pdf(w)};
    if (w >= p_.hi) return {1.0, pdf(w)};
    double c = 0.0;
    switch (p_.family) {
        case Family::Uniform: c = (w - p_.lo) / (p_.hi - p_.lo); break;
        case Family::TruncatedLogNormal:
            c = norm_mass(a_std_, (std::log(w) - p_.mu) / p_.sigma) / norm_;
            break;
        case Family::ScaledBeta:
            c = boost::math::ibeta(p_.alpha, p_.beta, (w - p_.lo) / (p_.hi - p_.lo));
            break;
    }
    return {std::clamp(c, 0.0, 1.0), pdf(w)};
}

double Distribution::upper_raw_moment(double x, int j) const {
    const double a = std::max(x, p_.lo);
    if (a >= p_.hi) return 0.0;
    switch (p_.family) {
        case Family::Uniform:
            return (std::pow(p_.hi, j + 1) - std::pow(a, j + 1)) / ((j + 1) * (p_.hi - p_.lo));
        case Family::TruncatedLogNormal: {
            const double shift = j * p_.sigma;
            const double lo_std = (std::log(a) - p_.mu) / p_.sigma - shift;
            const double scale = std::exp(j * p_.mu + 0.5 * j * j * p_.sigma * p_.sigma);
            return scale * norm_mass(lo_std, b_std_ - shift) / norm_;
        }
        case Family::ScaledBeta: break;
    }
    throw SolverError("Internal", "raw moments not used for scaled_beta");
}

double Distribution::upper_partial_moment(double x, int k) const {
    if (k < 0 || k > 2) throw ConfigError("upper_partial_moment: k must be 0, 1 or 2");
    if (x >= p_.hi) return 0.0;
    if (k == 0) return survival(x);
    const double width = p_.hi - p_.lo;
    switch (p_.family) {
        case Family::Uniform: {
            const double up = std::pow(p_.hi - x, k + 1);
            const double down = x < p_.lo ? std::pow(p_.lo - x, k + 1) : 0.0;
            return (up - down) / ((k + 1) * width);
        }
        case Family::TruncatedLogNormal: {
            double m = 0.0;
            for (int i = 0; i <= k; ++i)
                m += binom(k, i) * std::pow(-x, k - i) * upper_raw_moment(x, i);
            return std::max(m, 0.0);
        }
        case Family::ScaledBeta: {
            // Work in t = (w - lo) / width where t ~ Beta(alpha, beta).
            const double tx = (x - p_.lo) / width;
            const double t0 = std::max(tx, 0.0);
            double m = 0.0;
            double ratio = 1.0;  // B(alpha + i, beta) / B(alpha, beta)
            for (int i = 0; i <= k; ++i) {
                if (i > 0) ratio *= (p_.alpha + i - 1) / (p_.alpha + p_.beta + i - 1);
                const double tail = t0 > 0.0 ? boost::math::ibetac(p_.alpha + i, p_.beta, t0) : 1.0;
                m += binom(k, i) * std::pow(-tx, k - i) * ratio * tail;
            }
            return std::max(m * std::pow(width, k), 0.0);
        }
    }
    return 0.0;
}

double Distribution::sample(double u) const {
    if (!(u > 0.0)) return p_.lo;
    if (u >= 1.0) return p_.hi;
    double w = p_.lo;
    switch (p_.family) {
        case Family::Uniform: w = p_.lo + u * (p_.hi - p_.lo); break;
        case Family::TruncatedLogNormal: {
            static const boost::math::normal standard;
            const double below = norm_cdf(a_std_) + u * norm_;
            double z;
            if (below < 0.5) {
                z = boost::math::quantile(standard, below);
            } else {
                const double above = norm_sf(a_std_) - u * norm_;
                z = -boost::math::quantile(standard, std::max(above, 1e-300));
            }
            w = std::exp(p_.mu + p_.sigma * z);
            break;
        }
        case Family::ScaledBeta:
            w = p_.lo + (p_.hi - p_.lo) * boost::math::ibeta_inv(p_.alpha, p_.beta, u);
            break;
    }
    return std::clamp(w, p_.lo, p_.hi);
}

}  // namespace mccall
