#pragma once

#include <span>
#include <vector>

namespace mccall {

// Piecewise cubic Hermite interpolant that preserves the monotonicity of the
// data (Fritsch-Carlson). Slopes are either estimated from the data with the
// Fritsch-Butland weighted harmonic mean or supplied by the caller and then
// limited. Evaluation outside the knot range clamps to the end values.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);
    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes);

    double operator()(double t) const;
    double derivative(double t) const;

    std::span<const double> x() const { return x_; }
    std::span<const double> y() const { return y_; }
    std::span<const double> slopes() const { return m_; }
    bool empty() const { return x_.empty(); }

private:
    void validate() const;
    void limit();
    std::size_t segment(double t) const;

    std::vector<double> x_, y_, m_;
};

}  // namespace mccall
