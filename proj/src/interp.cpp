#include "mccall/interp.hpp"

#include <algorithm>
#include <cmath>

#include "mccall/errors.hpp"

namespace mccall {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    validate();
    const std::size_t n = x_.size();
    if (n == 1) return;
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x_[k + 1] - x_[k];
        d[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
        m_[0] = m_[1] = d[0];
        return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (d[k - 1] * d[k] <= 0.0) {
            m_[k] = 0.0;
            continue;
        }
        const double a = (h[k - 1] + 2.0 * h[k]) / (3.0 * (h[k - 1] + h[k]));
        m_[k] = d[k - 1] * d[k] / (a * d[k] + (1.0 - a) * d[k - 1]);
    }
    // Shape-preserving three-point end slopes.
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    };
    m_[0] = end_slope(h[0], h[1], d[0], d[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y,
                             std::vector<double> slopes)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
    validate();
    if (m_.size() != x_.size()) throw ConfigError("interpolant: slope count mismatch");
    limit();
}

void MonotoneCubic::validate() const {
    if (x_.empty() || x_.size() != y_.size())
        throw ConfigError("interpolant: knot and value arrays must be non-empty and equal length");
    for (std::size_t k = 0; k + 1 < x_.size(); ++k)
        if (!(x_[k + 1] > x_[k])) throw ConfigError("interpolant: knots must be strictly increasing");
}

void MonotoneCubic::limit() {
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
        const double d = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
        if (d == 0.0) {
            m_[k] = m_[k + 1] = 0.0;
            continue;
        }
        if (m_[k] * d < 0.0) m_[k] = 0.0;
        if (m_[k + 1] * d < 0.0) m_[k + 1] = 0.0;
        const double a = m_[k] / d, b = m_[k + 1] / d;
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            m_[k] = tau * a * d;
            m_[k + 1] = tau * b * d;
        }
    }
}

std::size_t MonotoneCubic::segment(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, x_.size() - 2);
}

double MonotoneCubic::operator()(double t) const {
    if (x_.size() == 1 || t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    const std::size_t k = segment(t);
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double dy = y_[k + 1] - y_[k];
    const double a = h * m_[k], b = h * m_[k + 1];
    // Expand around the nearer knot so that values close to a knot keep
    // their precision relative to that knot.
    if (s <= 0.5) return y_[k] + s * (a + s * ((3 * dy - 2 * a - b) + s * (a + b - 2 * dy)));
    const double u = (x_[k + 1] - t) / h;
    return y_[k + 1] - u * (b + u * ((3 * dy - a - 2 * b) + u * (a + b - 2 * dy)));
}

double MonotoneCubic::derivative(double t) const {
    if (x_.size() == 1 || t < x_.front() || t > x_.back()) return 0.0;
    const std::size_t k = segment(t);
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y_[k] + (-6 * s2 + 6 * s) * y_[k + 1]) / h +
           (3 * s2 - 4 * s + 1) * m_[k] + (3 * s2 - 2 * s) * m_[k + 1];
}

}  // namespace mccall
